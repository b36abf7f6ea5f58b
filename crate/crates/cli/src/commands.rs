//! One function per subcommand. Each loads the mesh, assembles the operator,
//! calls into the library and hands every artefact to [`Output`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spectral_basis::basis::{
    delta, diffusion_basis, diffusion_basis_set, eigen_basis, green_column, hamiltonian_basis, harmonic_basis,
    BasisSet, FilteredOperator, GreenRole, ScalarField, SpectralMethod,
};
use spectral_basis::mesh::{load_mesh, validate};
use spectral_basis::metrics::{comparison_matrix, Metric};
use spectral_basis::numerics::{EigenMethod, EigenOptions, EigenSystem, CLUSTER_TOL};
use spectral_basis::seeds::{coverage_curve, coverage_loop, curvature_field, farthest_point_sampling, max_curvature_vertex, SeedSet};
use spectral_basis::{FilterSpec, LaplacianOperator, TriangleMesh};

use crate::output::{read_field_csv, Format, Manifest, Output};
use crate::{
    BasisCommand, Cli, Command, CoverageArgs, DiffusionArgs, EigenArgs, EigenMethodArg, Family, GlobalArgs, GreenArgs,
    GreenRoleArg, HamiltonianArgs, MethodArgs, MethodKind, MetricKind, MetricsArgs, SeedArgs, SeedsArgs,
    SpectralArgs, SpectrumArgs,
};

pub fn run(cli: Cli) -> Result<PathBuf> {
    let g = &cli.global;
    let (name, defaults): (&str, &[Format]) = match &cli.command {
        Command::Basis { kind } => (
            match kind {
                BasisCommand::Harmonic(_) => "basis harmonic",
                BasisCommand::Hamiltonian(_) => "basis hamiltonian",
                BasisCommand::Eigen(_) => "basis eigen",
                BasisCommand::Diffusion(_) => "basis diffusion",
                BasisCommand::Spectral(_) => "basis spectral",
                BasisCommand::Green(_) => "basis green",
            },
            &[Format::Csv],
        ),
        Command::Metrics(_) => ("metrics", &[Format::Csv, Format::Pgm]),
        Command::Seeds(_) => ("seeds", &[]),
        Command::Coverage(_) => ("coverage", &[Format::Csv]),
        Command::Validate => ("validate", &[]),
        Command::Spectrum(_) => ("spectrum", &[]),
    };
    let formats: BTreeSet<Format> = if g.format.is_empty() {
        defaults.iter().copied().collect()
    } else {
        g.format.iter().copied().collect()
    };
    let manifest = Manifest {
        tool: "specbasis",
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        mesh: g.mesh.as_ref().map(|p| p.display().to_string()),
        scheme: g.scheme.to_string(),
        mass: g.mass.to_string(),
        parameters: BTreeMap::new(),
        timings: BTreeMap::new(),
        residuals: BTreeMap::new(),
        warnings: Vec::new(),
        files: Vec::new(),
    };
    let mut out = Output::new(&g.out, formats, manifest)?;
    let mesh = load(g, &mut out)?;
    match cli.command {
        Command::Validate => cmd_validate(&mesh, g, &mut out)?,
        command => {
            let op = out.timed("assemble", || LaplacianOperator::assemble(&mesh, g.scheme, g.mass))?;
            if op.obtuse_triangles() > 0 {
                out.param("obtuse_triangles", op.obtuse_triangles());
            }
            match command {
                Command::Basis { kind } => match kind {
                    BasisCommand::Harmonic(a) => cmd_harmonic(&mesh, &op, &a, &mut out)?,
                    BasisCommand::Hamiltonian(a) => cmd_hamiltonian(&mesh, &op, &a, &mut out)?,
                    BasisCommand::Eigen(a) => cmd_eigen(&mesh, &op, &a, &mut out)?,
                    BasisCommand::Diffusion(a) => cmd_diffusion(&mesh, &op, &a, &mut out)?,
                    BasisCommand::Spectral(a) => cmd_spectral(&mesh, &op, &a, &mut out)?,
                    BasisCommand::Green(a) => cmd_green(&mesh, &op, &a, &mut out)?,
                },
                Command::Metrics(a) => cmd_metrics(&mesh, &op, &a, &mut out)?,
                Command::Seeds(a) => cmd_seeds(&mesh, &op, &a, &mut out)?,
                Command::Coverage(a) => cmd_coverage(&mesh, &op, &a, &mut out)?,
                Command::Spectrum(a) => cmd_spectrum(&op, &a, &mut out)?,
                Command::Validate => unreachable!(),
            }
        }
    }
    out.finish()
}

fn load(g: &GlobalArgs, out: &mut Output) -> Result<TriangleMesh> {
    let path = g.mesh.as_ref().context("--mesh is required")?;
    let import = out
        .timed("load", || load_mesh(path, None))
        .with_context(|| format!("loading {}", path.display()))?;
    for w in import.warnings {
        out.warn(w);
    }
    out.param("vertices", import.mesh.num_vertices());
    out.param("triangles", import.mesh.num_triangles());
    Ok(import.mesh)
}

fn resolve_seeds(args: &SeedArgs, mesh: &TriangleMesh, op: &LaplacianOperator, out: &mut Output) -> Result<Vec<usize>> {
    let n = mesh.num_vertices();
    let mut seeds = args.seeds.clone();
    if let Some(path) = &args.seeds_file {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        seeds.extend(SeedSet::read_text(BufReader::new(file), n)?.indices());
    }
    if let Some(k) = args.fps {
        let start = max_curvature_vertex(mesh, op)?;
        let fps = out.timed("seeds", || farthest_point_sampling(mesh, k, start, args.fps_metric))?;
        seeds.extend(fps.indices());
    }
    if seeds.is_empty() {
        bail!("no seeds given; use --seed, --seeds-file or --fps");
    }
    SeedSet::new(seeds.clone(), n, "cli")?;
    out.param("seeds", &seeds);
    Ok(seeds)
}

fn method(m: &MethodArgs, default: MethodKind) -> SpectralMethod {
    match m.method.unwrap_or(default) {
        MethodKind::Chebyshev => SpectralMethod::Chebyshev { degree: m.degree },
        MethodKind::Truncated => SpectralMethod::Truncated { k: m.terms },
    }
}

fn eigen_options(kind: EigenMethodArg, tol: Option<f64>) -> EigenOptions {
    let mut opts = EigenOptions {
        method: match kind {
            EigenMethodArg::Auto => EigenMethod::Auto,
            EigenMethodArg::Lanczos => EigenMethod::Lanczos,
            EigenMethodArg::Dense => EigenMethod::Dense,
        },
        ..EigenOptions::default()
    };
    if let Some(t) = tol {
        opts.tol = t;
    }
    opts
}

fn write_set(set: &BasisSet, prefix: &str, mesh: &TriangleMesh, out: &mut Output) -> Result<()> {
    for (k, v) in &set.parameters {
        out.param(k, v);
    }
    for w in &set.warnings {
        out.warn(w.clone());
    }
    let seeds = if set.seeds.len() == set.len() { set.seeds.clone() } else { (0..set.len()).collect() };
    for (f, s) in set.fields.iter().zip(seeds) {
        out.field(&format!("{prefix}_seed{s}"), f.values(), mesh)?;
    }
    Ok(())
}

fn partition_defect(set: &BasisSet) -> f64 {
    (0..set.dim())
        .map(|i| (set.fields.iter().map(|f| f.values()[i]).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max)
}

fn cmd_harmonic(mesh: &TriangleMesh, op: &LaplacianOperator, a: &SeedArgs, out: &mut Output) -> Result<()> {
    let seeds = resolve_seeds(a, mesh, op, out)?;
    let set = out.timed("solve", || harmonic_basis(mesh, op, &seeds))?;
    out.residual("partition_of_unity", partition_defect(&set));
    write_set(&set, "harmonic", mesh, out)
}

fn potential(spec: &str, mesh: &TriangleMesh, op: &LaplacianOperator) -> Result<Vec<f64>> {
    let n = mesh.num_vertices();
    if let Some(v) = spec.strip_prefix("const=") {
        let v: f64 = v.parse().with_context(|| format!("bad constant potential '{v}'"))?;
        return Ok(vec![v; n]);
    }
    if spec == "curvature" {
        return Ok(curvature_field(mesh, op)?.into_values());
    }
    let values = read_field_csv(std::path::Path::new(spec))?;
    if values.len() != n {
        bail!("potential has {} values but the mesh has {n} vertices", values.len());
    }
    Ok(values)
}

fn cmd_hamiltonian(mesh: &TriangleMesh, op: &LaplacianOperator, a: &HamiltonianArgs, out: &mut Output) -> Result<()> {
    let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
    let v = potential(&a.potential, mesh, op)?;
    out.param("potential", &a.potential);
    let set = out.timed("solve", || hamiltonian_basis(mesh, op, &v, a.mu, &seeds))?;
    write_set(&set, "hamiltonian", mesh, out)
}

#[derive(Serialize)]
struct Spectrum<'a> {
    k: usize,
    values: &'a [f64],
    residual_norms: Vec<f64>,
    orthonormality_defect: f64,
    multiplicities: Vec<usize>,
}

fn spectrum(op: &LaplacianOperator, k: usize, opts: &EigenOptions, out: &mut Output) -> Result<EigenSystem> {
    out.param("k", k);
    out.param("eigen_method", opts.method);
    out.param("eigen_tol", opts.tol);
    let eig = out.timed("eigen", || eigen_basis(op, k, opts))?;
    let (l, b) = (op.stiffness()?, op.mass());
    let residual_norms = eig.residual_norms(l, b);
    let orthonormality_defect = eig.orthonormality_defect(b);
    out.residual("max_eigen_residual", residual_norms.iter().copied().fold(0.0, f64::max));
    out.residual("orthonormality_defect", orthonormality_defect);
    let clusters = eig.clusters(CLUSTER_TOL);
    let report = Spectrum {
        k: eig.len(),
        values: eig.values(),
        residual_norms,
        orthonormality_defect,
        multiplicities: clusters.iter().map(|r| r.len()).collect(),
    };
    out.write_json("spectrum.json", &report)?;
    Ok(eig)
}

fn cmd_eigen(mesh: &TriangleMesh, op: &LaplacianOperator, a: &EigenArgs, out: &mut Output) -> Result<()> {
    let eig = spectrum(op, a.k, &eigen_options(a.eigen_method, a.tol), out)?;
    for (i, x) in eig.vectors().iter().enumerate() {
        out.field(&format!("eigen_{i:03}"), x, mesh)?;
    }
    Ok(())
}

fn cmd_spectrum(op: &LaplacianOperator, a: &SpectrumArgs, out: &mut Output) -> Result<()> {
    spectrum(op, a.k, &eigen_options(a.eigen_method, a.tol), out).map(|_| ())
}

/// Records which evaluation path a filtered operator took.
fn record_path(filter: &FilterSpec, method: SpectralMethod, out: &mut Output) -> Result<()> {
    out.param("filter", filter.to_string());
    out.param("method", method.to_string());
    match method {
        SpectralMethod::Chebyshev { degree } => {
            let pf = filter.partial_fraction(degree)?;
            let path = if pf.is_exact() { "exact_rational" } else { "chebyshev_approximation" };
            out.param("path", path);
            out.param("poles", pf.degree());
            out.residual("filter_approximation_error", pf.approximation_error());
        }
        SpectralMethod::Truncated { .. } => out.param("path", "truncated"),
    }
    Ok(())
}

fn cmd_diffusion(mesh: &TriangleMesh, op: &LaplacianOperator, a: &DiffusionArgs, out: &mut Output) -> Result<()> {
    let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
    let m = method(&a.method, MethodKind::Chebyshev);
    record_path(&FilterSpec::Exponential { t: a.t }, m, out)?;
    let set = out.timed("solve", || diffusion_basis_set(op, a.t, &seeds, m))?;
    write_set(&set, "diffusion", mesh, out)
}

fn cmd_spectral(mesh: &TriangleMesh, op: &LaplacianOperator, a: &SpectralArgs, out: &mut Output) -> Result<()> {
    let filter: FilterSpec = a.filter.parse()?;
    let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
    let default = if filter.partial_fraction(a.method.degree).is_ok() {
        MethodKind::Chebyshev
    } else {
        MethodKind::Truncated
    };
    let m = method(&a.method, default);
    record_path(&filter, m, out)?;
    let k = out.timed("setup", || FilteredOperator::new(op, &filter, m))?;
    for w in k.warnings(op.dim()) {
        out.warn(w);
    }
    if filter.is_singular_at_zero() {
        out.warn("constant mode deflated for a filter singular at zero");
    }
    for s in seeds {
        let col = out.timed("solve", || k.column(s))?;
        out.field(&format!("spectral_seed{s}"), &col, mesh)?;
    }
    Ok(())
}

fn cmd_green(mesh: &TriangleMesh, op: &LaplacianOperator, a: &GreenArgs, out: &mut Output) -> Result<()> {
    let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
    let role = match a.role {
        GreenRoleArg::Harmonic => GreenRole::Harmonic,
        GreenRoleArg::Diffusion => GreenRole::Diffusion {
            t: a.t.context("--t is required for the diffusion role")?,
        },
        GreenRoleArg::General => GreenRole::General(a.filter.as_deref().context("--filter is required for the general role")?.parse()?),
    };
    out.param("role", &role);
    let m = method(&a.method, MethodKind::Chebyshev);
    match &role {
        GreenRole::Harmonic => {}
        GreenRole::Diffusion { t } => record_path(&FilterSpec::Exponential { t: *t }, m, out)?,
        GreenRole::General(f) => record_path(f, m, out)?,
    }
    let mut worst: f64 = 0.0;
    for s in seeds {
        let g = out.timed("solve", || green_column(op, &role, s, m))?;
        if role == GreenRole::Harmonic {
            worst = worst.max(harmonic_green_residual(op, s, g.values())?);
        }
        out.field(&format!("green_seed{s}"), g.values(), mesh)?;
    }
    if role == GreenRole::Harmonic {
        out.residual("green_equation", worst);
    }
    Ok(())
}

/// `max |L g - (B e_s - share B 1)|`.
fn harmonic_green_residual(op: &LaplacianOperator, seed: usize, g: &[f64]) -> Result<f64> {
    let b = op.mass();
    let be = b.mul_vec(&delta(op.dim(), seed)?);
    let share = be.iter().sum::<f64>() / op.total_mass();
    let b1 = op.mass_ones();
    let lg = op.stiffness()?.mul_vec(g);
    Ok(lg
        .iter()
        .zip(be.iter().zip(&b1))
        .map(|(l, (e, o))| (l - (e - share * o)).abs())
        .fold(0.0, f64::max))
}

fn cmd_metrics(mesh: &TriangleMesh, op: &LaplacianOperator, a: &MetricsArgs, out: &mut Output) -> Result<()> {
    let fields: Vec<ScalarField> = if a.fields.is_empty() {
        generate_fields(mesh, op, a, out)?
    } else {
        a.fields
            .iter()
            .map(|p| {
                let v = read_field_csv(p)?;
                if v.len() != mesh.num_vertices() {
                    bail!("{} has {} values but the mesh has {} vertices", p.display(), v.len(), mesh.num_vertices());
                }
                Ok(ScalarField::new(v, p.display().to_string())?)
            })
            .collect::<Result<_>>()?
    };
    out.param("fields", fields.len());
    out.param("normalize", a.normalize);
    let kernel;
    let metric = match a.metric {
        MetricKind::Area => Metric::Area,
        MetricKind::Conformal => Metric::Conformal,
        MetricKind::Kernel => {
            let filter: FilterSpec = a.kernel.parse()?;
            let default = if filter.partial_fraction(a.method.degree).is_ok() {
                MethodKind::Chebyshev
            } else {
                MethodKind::Truncated
            };
            let m = method(&a.method, default);
            out.param("kernel", filter.to_string());
            out.param("kernel_method", m.to_string());
            kernel = out.timed("setup", || FilteredOperator::new(op, &filter, m))?;
            Metric::Kernel(&kernel)
        }
    };
    out.param("metric", metric.name());
    let matrix = out.timed("metric", || comparison_matrix(op, &fields, &metric, a.normalize))?;
    out.residual("symmetry_defect", matrix.symmetry_defect());
    if out.wants(Format::Csv) {
        let mut buf = Vec::new();
        matrix.write_csv(&mut buf)?;
        out.write("matrix.csv", &buf)?;
    }
    if out.wants(Format::Pgm) {
        let mut buf = Vec::new();
        matrix.write_pgm(&mut buf)?;
        out.write("matrix.pgm", &buf)?;
    }
    if out.wants(Format::Json) {
        out.write_json("matrix.json", &matrix)?;
    }
    Ok(())
}

fn generate_fields(mesh: &TriangleMesh, op: &LaplacianOperator, a: &MetricsArgs, out: &mut Output) -> Result<Vec<ScalarField>> {
    out.param("family", format!("{:?}", a.family).to_lowercase());
    Ok(match a.family {
        Family::Eigen => {
            out.param("k", a.k);
            let eig = out.timed("eigen", || eigen_basis(op, a.k, &EigenOptions::default()))?;
            eig.vectors()
                .iter()
                .enumerate()
                .map(|(i, x)| ScalarField::new(x.clone(), format!("eigen {i}")))
                .collect::<spectral_basis::Result<_>>()?
        }
        Family::Diffusion => {
            let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
            let m = method(&a.method, MethodKind::Chebyshev);
            out.param("t", a.t);
            out.param("method", m.to_string());
            out.timed("solve", || diffusion_basis_set(op, a.t, &seeds, m))?.fields
        }
        Family::Harmonic => {
            let seeds = resolve_seeds(&a.seeds, mesh, op, out)?;
            out.timed("solve", || harmonic_basis(mesh, op, &seeds))?.fields
        }
    })
}

fn cmd_seeds(mesh: &TriangleMesh, op: &LaplacianOperator, a: &SeedsArgs, out: &mut Output) -> Result<()> {
    let start = if a.start == "auto" {
        max_curvature_vertex(mesh, op)?
    } else {
        a.start.parse().with_context(|| format!("--start must be a vertex index or 'auto', got '{}'", a.start))?
    };
    out.param("k", a.k);
    out.param("start", start);
    out.param("metric", a.metric);
    let seeds = out.timed("seeds", || farthest_point_sampling(mesh, a.k, start, a.metric))?;
    let mut buf = Vec::new();
    seeds.write_text(&mut buf)?;
    out.write("seeds.txt", &buf)
}

#[derive(Serialize)]
struct CoverageReport<'a> {
    iterations: usize,
    history: &'a [f64],
    seeds: &'a [usize],
    initial_seeds: usize,
    tau: f64,
    t: f64,
}

fn cmd_coverage(mesh: &TriangleMesh, op: &LaplacianOperator, a: &CoverageArgs, out: &mut Output) -> Result<()> {
    let m = method(&a.method, MethodKind::Chebyshev);
    out.param("t", a.t);
    out.param("k0", a.k0);
    out.param("tau", a.tau);
    out.param("method", m.to_string());
    let generator = |s: usize| diffusion_basis(op, a.t, s, m);
    let result = out.timed("coverage", || coverage_loop(mesh, op, generator, a.k0, a.tau))?;
    let mut buf = Vec::new();
    result.seeds.write_text(&mut buf)?;
    out.write("seeds.txt", &buf)?;
    let curve = coverage_curve(&result.basis.fields, a.tau)?;
    if out.wants(Format::Csv) {
        let mut text = String::from("k,fraction\n");
        for (k, c) in curve.iter().enumerate() {
            text.push_str(&format!("{},{c}\n", k + 1));
        }
        out.write("coverage_curve.csv", text.as_bytes())?;
    }
    let report = CoverageReport {
        iterations: result.iterations(),
        history: &result.history,
        seeds: result.seeds.indices(),
        initial_seeds: a.k0.min(mesh.num_vertices()),
        tau: a.tau,
        t: a.t,
    };
    out.write_json("coverage_report.json", &report)?;
    for f in result.basis.fields.iter().zip(result.seeds.indices()) {
        if out.wants(Format::Ply) || out.wants(Format::Json) {
            out.field(&format!("diffusion_seed{}", f.1), f.0.values(), mesh)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    #[serde(flatten)]
    report: spectral_basis::mesh::MeshReport,
    closed: bool,
    surface_area: f64,
    mean_edge_length: f64,
    obtuse_triangles: Option<usize>,
    assembly_error: Option<String>,
}

fn cmd_validate(mesh: &TriangleMesh, g: &GlobalArgs, out: &mut Output) -> Result<()> {
    let report = validate(mesh);
    let (obtuse, err) = match LaplacianOperator::assemble(mesh, g.scheme, g.mass) {
        Ok(op) => (Some(op.obtuse_triangles()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if !report.non_manifold_edges.is_empty() {
        out.warn(format!("{} non-manifold edges", report.non_manifold_edges.len()));
    }
    if !report.degenerate_triangles.is_empty() {
        out.warn(format!("{} degenerate triangles", report.degenerate_triangles.len()));
    }
    let v = ValidationReport {
        closed: report.is_closed(),
        surface_area: mesh.surface_area(),
        mean_edge_length: mesh.mean_edge_length(),
        obtuse_triangles: obtuse,
        assembly_error: err,
        report,
    };
    out.write_json("report.json", &v)
}
