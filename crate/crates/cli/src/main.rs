use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use sft_core::average::{averaged_euler, BundleModel};
use sft_core::building::{degeneracy, faces, glue_building, Building, TotalGluingParameter};
use sft_core::classify::{
    check_dj_laws, convolution, induction_schedule, parse_rational, rescale, respects_faces, FiberVector, Multisection, ScheduleMode, TableFibers,
    Universe, VectorFibers,
};
use sft_core::glue::{glue_neck, middle_loop_average, plus_glue, Cutoff, GluingParameter, GluingProfile, SampledNeckMap};
use sft_core::spectral::{
    cz_index, maslov_index, orbit_check, parity_check, spectral_gap, spectrum, weight_of_gap, OperatorSpec, OrbitCheckSpec, SymplecticPath,
};
use sft_core::surface::{arithmetic_genus, check_stability_with, deformation_dimension, nodal_type, Convention, NodalSurface};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Nodal surfaces, gluing, buildings, moduli classes, index theory and Euler averaging.
///
/// Every command prints a JSON report on standard output and a one-line summary on
/// standard error. Exit status: 0 success, 1 domain or validation error, 2 usage error.
#[derive(Parser)]
#[command(name = "sft", version)]
struct Cli {
    /// Seed recorded in the report and used by randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nodal surfaces: stability, dual graph, dimension.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Gluing profiles, necks and glued maps.
    #[command(subcommand)]
    Glue(GlueCmd),
    /// Multi-floor buildings.
    #[command(subcommand)]
    Building(BuildingCmd),
    /// Moduli classes and weighted multisections.
    #[command(subcommand)]
    Classify(ClassifyCmd),
    /// Indices, asymptotic operators and closed orbits.
    #[command(subcommand)]
    Spectral(SpectralCmd),
    /// Same as `spectral cz`.
    Cz { path: PathBuf },
    /// Same as `spectral spectrum`.
    Spectrum(SpectrumArgs),
    /// Same as `spectral gap`.
    Gap(SpectrumArgs),
    /// Same as `spectral orbit`.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Average signed zero counts of a perturbed section over the parameter cube.
    EulerDemo {
        /// ts2, trivial-s2 or t2.
        #[arg(long, default_value = "ts2")]
        model: String,
        /// Number of perturbation parameters.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Stability of every component; exits 1 when unstable.
    Stability {
        file: PathBuf,
        /// Do not count punctures as special points.
        #[arg(long)]
        plain: bool,
    },
    /// Decorated dual graph.
    Type {
        file: PathBuf,
        /// Count punctures as marked points.
        #[arg(long)]
        dm_data: bool,
    },
    /// Arithmetic genus and deformation dimension.
    Dim {
        file: PathBuf,
        #[arg(long)]
        dm_data: bool,
    },
}

#[derive(Args)]
struct ParameterArgs {
    /// Gluing parameter as `modulus@angle`, angle in turns.
    #[arg(long)]
    a: String,
    /// exp or classical.
    #[arg(long, default_value = "exp")]
    kind: String,
}

#[derive(Subcommand)]
enum GlueCmd {
    /// Neck length of a modulus, or the modulus of a neck length.
    Profile {
        #[arg(long, default_value = "exp")]
        kind: String,
        #[arg(long, conflicts_with = "length", required_unless_present = "length")]
        r: Option<f64>,
        #[arg(long)]
        length: Option<f64>,
    },
    /// Glued neck of a gluing parameter.
    Neck(ParameterArgs),
    /// Average of a sampled neck map over the middle loop.
    Average {
        map: PathBuf,
        #[command(flatten)]
        param: ParameterArgs,
    },
    /// Glue two sampled maps with the cutoff.
    Plusglue {
        plus: PathBuf,
        minus: PathBuf,
        #[command(flatten)]
        param: ParameterArgs,
    },
}

#[derive(Subcommand)]
enum BuildingCmd {
    /// Degeneracy index of a building.
    Degeneracy { file: PathBuf },
    /// Glue a building with a total gluing parameter.
    Glue { building: PathBuf, params: PathBuf },
    /// Boundary faces, one splitting per interface.
    Faces { file: PathBuf },
}

#[derive(Subcommand)]
enum ClassifyCmd {
    /// Check the boundary laws of a universe; exits 1 on violations.
    Laws { universe: PathBuf },
    /// Order in which classes can be treated, faces first.
    Schedule {
        universe: PathBuf,
        /// contact or dj.
        #[arg(long, default_value = "contact")]
        mode: String,
    },
    /// Convolution of two multisections.
    Convolve {
        a: PathBuf,
        b: PathBuf,
        /// Fiber addition table; without it fibers are rational vectors.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Rescale the fiber elements of a multisection.
    Rescale {
        multisection: PathBuf,
        /// Rational scale factor such as `1/2`.
        #[arg(long)]
        beta: String,
        /// Fiber table as for `convolve`.
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SpectrumArgs {
    op: PathBuf,
    /// Override the number of Fourier modes.
    #[arg(long)]
    modes: Option<usize>,
}

#[derive(Subcommand)]
enum SpectralCmd {
    /// Conley-Zehnder index of a symplectic path.
    Cz { path: PathBuf },
    /// Maslov index of a symplectic loop.
    Maslov { path: PathBuf },
    /// Eigenvalues of an asymptotic operator.
    Spectrum(SpectrumArgs),
    /// Eigenvalues closest to zero on either side.
    Gap(SpectrumArgs),
    /// Parity of the index against the sign of det(Id - A).
    Parity { path: PathBuf },
    /// Closed orbits of an ellipsoid model.
    Orbit { model: PathBuf },
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Same as `spectral orbit`.
    Check { model: PathBuf },
}

enum CliError {
    Domain(String),
}

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Result of a command before it is wrapped into a report.
struct Outcome {
    outputs: Value,
    diagnostics: Vec<String>,
    summary: String,
    ok: bool,
}

impl Outcome {
    fn ok(outputs: Value, summary: impl Into<String>) -> Self {
        Self { outputs, diagnostics: Vec::new(), summary: summary.into(), ok: true }
    }
}

#[derive(Serialize)]
struct Report {
    command: String,
    inputs_digest: String,
    outputs: Value,
    diagnostics: Vec<String>,
    seed: u64,
    version: String,
}

struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        Self { hasher }
    }

    fn arg(&mut self, name: &str, value: impl std::fmt::Display) {
        self.hasher.update(format!("\0{name}={value}").as_bytes());
    }

    fn read<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        self.hasher.update(b"\0file\0");
        self.hasher.update(text.as_bytes());
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::Domain(format!("{}: field `{field}`: {}", path.display(), e.inner()))
        })
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn profile(kind: &str) -> Result<GluingProfile, CliError> {
    kind.parse().map_err(CliError::Domain)
}

fn parameter(inputs: &mut Inputs, p: &ParameterArgs) -> Result<(GluingParameter, GluingProfile), CliError> {
    inputs.arg("a", &p.a);
    inputs.arg("kind", &p.kind);
    Ok((p.a.parse()?, profile(&p.kind)?))
}

fn operator(inputs: &mut Inputs, args: &SpectrumArgs) -> Result<sft_core::spectral::AsymptoticOperator, CliError> {
    let mut spec: OperatorSpec = inputs.read(&args.op)?;
    if let Some(k) = args.modes {
        inputs.arg("modes", k);
        spec.modes = k;
    }
    Ok(spec.build()?)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Surface(SurfaceCmd::Stability { .. }) => "surface stability",
        Command::Surface(SurfaceCmd::Type { .. }) => "surface type",
        Command::Surface(SurfaceCmd::Dim { .. }) => "surface dim",
        Command::Glue(GlueCmd::Profile { .. }) => "glue profile",
        Command::Glue(GlueCmd::Neck(_)) => "glue neck",
        Command::Glue(GlueCmd::Average { .. }) => "glue average",
        Command::Glue(GlueCmd::Plusglue { .. }) => "glue plusglue",
        Command::Building(BuildingCmd::Degeneracy { .. }) => "building degeneracy",
        Command::Building(BuildingCmd::Glue { .. }) => "building glue",
        Command::Building(BuildingCmd::Faces { .. }) => "building faces",
        Command::Classify(ClassifyCmd::Laws { .. }) => "classify laws",
        Command::Classify(ClassifyCmd::Schedule { .. }) => "classify schedule",
        Command::Classify(ClassifyCmd::Convolve { .. }) => "classify convolve",
        Command::Classify(ClassifyCmd::Rescale { .. }) => "classify rescale",
        Command::Spectral(SpectralCmd::Cz { .. }) | Command::Cz { .. } => "spectral cz",
        Command::Spectral(SpectralCmd::Maslov { .. }) => "spectral maslov",
        Command::Spectral(SpectralCmd::Spectrum(_)) | Command::Spectrum(_) => "spectral spectrum",
        Command::Spectral(SpectralCmd::Gap(_)) | Command::Gap(_) => "spectral gap",
        Command::Spectral(SpectralCmd::Parity { .. }) => "spectral parity",
        Command::Spectral(SpectralCmd::Orbit { .. }) | Command::Orbit(_) => "spectral orbit",
        Command::EulerDemo { .. } => "euler-demo",
    }
}

fn run(command: &Command, seed: u64, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match command {
        Command::Surface(cmd) => surface(cmd, inputs),
        Command::Glue(cmd) => glue(cmd, inputs),
        Command::Building(cmd) => building(cmd, inputs),
        Command::Classify(cmd) => classify(cmd, inputs),
        Command::Spectral(cmd) => spectral(cmd, inputs),
        Command::Cz { path } => spectral(&SpectralCmd::Cz { path: path.clone() }, inputs),
        Command::Spectrum(a) => spectral(&SpectralCmd::Spectrum(SpectrumArgs { op: a.op.clone(), modes: a.modes }), inputs),
        Command::Gap(a) => spectral(&SpectralCmd::Gap(SpectrumArgs { op: a.op.clone(), modes: a.modes }), inputs),
        Command::Orbit(OrbitCmd::Check { model }) => spectral(&SpectralCmd::Orbit { model: model.clone() }, inputs),
        Command::EulerDemo { model, n, samples } => {
            inputs.arg("model", model);
            inputs.arg("n", n);
            inputs.arg("samples", samples);
            let m = BundleModel::preset(model, *n)?;
            let est = averaged_euler(&m, *samples, seed)?;
            let mut out = Outcome::ok(to_value(&est), format!("euler estimate {est}"));
            if est.degenerate > 0 {
                out.diagnostics.push(format!("{} samples excluded as near-degenerate", est.degenerate));
            }
            Ok(out)
        }
    }
}

fn convention(dm_data: bool) -> Convention {
    if dm_data {
        Convention::DmData
    } else {
        Convention::Plain
    }
}

fn surface(cmd: &SurfaceCmd, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match cmd {
        SurfaceCmd::Stability { file, plain } => {
            inputs.arg("plain", plain);
            let s: NodalSurface = inputs.read(file)?;
            let report = check_stability_with(&s, convention(!plain))?;
            let unstable: Vec<String> = report.components.iter().filter(|c| !c.stable).map(|c| c.component.clone()).collect();
            let mut out = Outcome::ok(to_value(&report), if report.stable { "stable".into() } else { format!("unstable: {}", unstable.join(", ")) });
            if !report.stable {
                out.ok = false;
                out.diagnostics.push(format!("unstable components: {}", unstable.join(", ")));
            }
            Ok(out)
        }
        SurfaceCmd::Type { file, dm_data } => {
            inputs.arg("dm_data", dm_data);
            let s: NodalSurface = inputs.read(file)?;
            let g = nodal_type(&s, convention(*dm_data))?;
            let summary = format!("graph with {} vertices, stable: {}", g.vertices.len(), g.is_stable());
            Ok(Outcome::ok(to_value(&g), summary))
        }
        SurfaceCmd::Dim { file, dm_data } => {
            inputs.arg("dm_data", dm_data);
            let s: NodalSurface = inputs.read(file)?;
            let genus = arithmetic_genus(&s)?;
            let dim = deformation_dimension(&s, convention(*dm_data))?;
            Ok(Outcome::ok(json!({ "arithmetic_genus": genus, "dimension": dim }), format!("genus {genus}, dimension {dim}")))
        }
    }
}

fn glue(cmd: &GlueCmd, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match cmd {
        GlueCmd::Profile { kind, r, length } => {
            inputs.arg("kind", kind);
            let p = profile(kind)?;
            let (r, length) = match (r, length) {
                (Some(r), _) => {
                    inputs.arg("r", r);
                    (*r, p.eval(*r)?)
                }
                (None, Some(len)) => {
                    inputs.arg("length", len);
                    (p.invert(*len)?, *len)
                }
                (None, None) => unreachable!("clap requires one of --r and --length"),
            };
            Ok(Outcome::ok(json!({ "profile": p, "r": r, "length": length }), format!("r = {r} <-> R = {length}")))
        }
        GlueCmd::Neck(args) => {
            let (a, p) = parameter(inputs, args)?;
            let neck = glue_neck(a, p)?;
            Ok(Outcome::ok(to_value(&neck), format!("neck of length {} twisted by {} turns", neck.length, neck.angle)))
        }
        GlueCmd::Average { map, param } => {
            let (a, p) = parameter(inputs, param)?;
            let u: SampledNeckMap = inputs.read(map)?;
            let avg = middle_loop_average(&u, a, p, None)?;
            Ok(Outcome::ok(json!({ "average": avg }), format!("middle-loop average {avg:?}")))
        }
        GlueCmd::Plusglue { plus, minus, param } => {
            let (a, p) = parameter(inputs, param)?;
            let up: SampledNeckMap = inputs.read(plus)?;
            let um: SampledNeckMap = inputs.read(minus)?;
            let glued = plus_glue(&up, &um, a, p, Cutoff)?;
            let summary = if a.is_zero() { "unglued pair returned" } else { "glued map computed" };
            Ok(Outcome::ok(to_value(&glued), summary))
        }
    }
}

fn building(cmd: &BuildingCmd, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match cmd {
        BuildingCmd::Degeneracy { file } => {
            let b: Building = inputs.read(file)?;
            let d = degeneracy(&b)?;
            Ok(Outcome::ok(json!({ "degeneracy": d }), format!("degeneracy {d}")))
        }
        BuildingCmd::Glue { building, params } => {
            let b: Building = inputs.read(building)?;
            let p: TotalGluingParameter = inputs.read(params)?;
            let glued = glue_building(&b, &p)?;
            let d = glued.degeneracy();
            Ok(Outcome::ok(json!({ "building": glued, "degeneracy": d }), format!("glued building with {} floors", d + 1)))
        }
        BuildingCmd::Faces { file } => {
            let b: Building = inputs.read(file)?;
            let fs = faces(&b)?;
            let n = fs.len();
            Ok(Outcome::ok(json!({ "face_count": n, "faces": fs }), format!("{n} faces")))
        }
    }
}

fn multisections<M, E>(
    inputs: &mut Inputs,
    monoid: &M,
    paths: &[&PathBuf],
    f: impl Fn(&M, &[Multisection<E>]) -> Result<Multisection<E>, sft_core::classify::ClassifyError>,
) -> Result<Outcome, CliError>
where
    E: Ord + Clone + Serialize + DeserializeOwned,
{
    let parts = paths.iter().map(|p| inputs.read::<Multisection<E>>(p)).collect::<Result<Vec<_>, _>>()?;
    let out = f(monoid, &parts)?;
    let summary = format!("{} fiber elements, total weight {}", out.weights().len(), out.total());
    Ok(Outcome::ok(to_value(&out), summary))
}

fn vector_dim(inputs: &mut Inputs, path: &Path) -> Result<usize, CliError> {
    let m: Multisection<FiberVector> = inputs.read(path)?;
    m.weights().keys().next().map(|v| v.0.len()).ok_or_else(|| CliError::Domain("empty multisection".into()))
}

fn classify(cmd: &ClassifyCmd, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match cmd {
        ClassifyCmd::Laws { universe } => {
            let u: Universe = inputs.read(universe)?;
            let violations = check_dj_laws(&u)?;
            let ok = violations.is_empty();
            let mut out = Outcome::ok(json!({ "ok": ok, "violations": violations }), format!("{} law violations", violations.len()));
            out.ok = ok;
            out.diagnostics = violations.iter().map(|v| format!("law {} fails at `{}`: {}", v.law, v.class, v.detail)).collect();
            Ok(out)
        }
        ClassifyCmd::Schedule { universe, mode } => {
            inputs.arg("mode", mode);
            let mode: ScheduleMode = mode.parse()?;
            let u: Universe = inputs.read(universe)?;
            let order = induction_schedule(&u, mode)?;
            let respects = respects_faces(&u, &order);
            Ok(Outcome::ok(json!({ "order": order, "respects_faces": respects }), format!("{} classes scheduled", order.len())))
        }
        ClassifyCmd::Convolve { a, b, table } => match table {
            Some(t) => {
                let monoid: TableFibers = inputs.read(t)?;
                multisections(inputs, &monoid, &[a, b], |m, p| convolution(m, &p[0], &p[1]))
            }
            None => {
                let dim = vector_dim(inputs, a)?;
                multisections(inputs, &VectorFibers { dim }, &[a, b], |m, p| convolution(m, &p[0], &p[1]))
            }
        },
        ClassifyCmd::Rescale { multisection, beta, table } => {
            inputs.arg("beta", beta);
            let beta = parse_rational(beta)?;
            match table {
                Some(t) => {
                    let monoid: TableFibers = inputs.read(t)?;
                    multisections(inputs, &monoid, &[multisection], |m, p| rescale(m, &beta, &p[0]))
                }
                None => {
                    let dim = vector_dim(inputs, multisection)?;
                    multisections(inputs, &VectorFibers { dim }, &[multisection], |m, p| rescale(m, &beta, &p[0]))
                }
            }
        }
    }
}

fn spectral(cmd: &SpectralCmd, inputs: &mut Inputs) -> Result<Outcome, CliError> {
    match cmd {
        SpectralCmd::Cz { path } => {
            let p: SymplecticPath = inputs.read(path)?;
            let cz = cz_index(&p)?;
            Ok(Outcome::ok(json!({ "cz": cz }), format!("Conley-Zehnder index {cz}")))
        }
        SpectralCmd::Maslov { path } => {
            let p: SymplecticPath = inputs.read(path)?;
            let m = maslov_index(&p)?;
            Ok(Outcome::ok(json!({ "maslov": m }), format!("Maslov index {m}")))
        }
        SpectralCmd::Spectrum(args) => {
            let op = operator(inputs, args)?;
            let eig = spectrum(&op)?;
            Ok(Outcome::ok(json!({ "modes": op.modes(), "eigenvalues": eig }), format!("{} eigenvalues", eig.len())))
        }
        SpectralCmd::Gap(args) => {
            let op = operator(inputs, args)?;
            let gap = spectral_gap(&op)?;
            let weight = weight_of_gap(&gap).ok();
            let mut out = Outcome::ok(json!({ "gap": gap, "weight": weight }), format!("gap ({}, {})", gap.lower, gap.upper));
            if gap.degenerate {
                out.diagnostics.push("0 is an eigenvalue: the operator is degenerate".into());
            }
            Ok(out)
        }
        SpectralCmd::Parity { path } => {
            let p: SymplecticPath = inputs.read(path)?;
            let n = p.dim() / 2 + 1;
            let r = parity_check(&p, n)?;
            let mut out = Outcome::ok(to_value(&r), format!("CZ {} parity {} consistent {}", r.cz, r.parity_bit, r.consistent));
            out.ok = r.consistent;
            Ok(out)
        }
        SpectralCmd::Orbit { model } => {
            let spec: OrbitCheckSpec = inputs.read(model)?;
            let r = orbit_check(&spec)?;
            Ok(Outcome::ok(to_value(&r), format!("{} simple orbits checked", r.orbits.len())))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = command_name(&cli.command);
    let mut inputs = Inputs::new(name);
    inputs.arg("seed", cli.seed);
    let result = run(&cli.command, cli.seed, &mut inputs);
    let (outcome, code) = match result {
        Ok(o) => {
            let code = if o.ok { 0 } else { 1 };
            (o, code)
        }
        Err(CliError::Domain(msg)) => (Outcome { outputs: Value::Null, diagnostics: vec![msg.clone()], summary: format!("error: {msg}"), ok: false }, 1),
    };
    let report = Report {
        command: name.to_string(),
        inputs_digest: inputs.digest(),
        outputs: outcome.outputs,
        diagnostics: outcome.diagnostics,
        seed: cli.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    eprintln!("sft {name}: {}", outcome.summary);
    ExitCode::from(code)
}
