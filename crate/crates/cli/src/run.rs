//! The three run modes and their outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use eddykit_core::coupled::{CoupledSolution, Discretization};
use eddykit_core::cvec::CVec3;
use eddykit_core::dg::{self, NormParts};
use eddykit_core::manufactured::{
    default_probes, default_source, make_exact, manufactured_system, measure_error, probe,
    run_convergence, ErrorReport, Probe, StudyConfig,
};
use eddykit_core::mesh::load_msh;
use eddykit_core::spaces::build_spaces;
use eddykit_core::verify::{calderon_residuals, spectral_table, CalderonResiduals, SpectralRow};
use eddykit_core::{bem::BemMatrices, TetMesh, Vec3};
use faer::c64;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Mode, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct MeshHash {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub program: &'static str,
    pub version: &'static str,
    pub mode: Mode,
    pub config_sha256: String,
    pub meshes: Vec<MeshHash>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl Provenance {
    pub fn new(mode: Mode, config_path: &Path, cfg: &RunConfig) -> Result<Self> {
        let meshes = cfg
            .meshes
            .iter()
            .map(|m| {
                Ok(MeshHash {
                    file: m.file_name().map_or_else(
                        || m.display().to_string(),
                        |f| f.to_string_lossy().into_owned(),
                    ),
                    sha256: sha256_file(m)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Provenance {
            program: "eddykit",
            version: env!("CARGO_PKG_VERSION"),
            mode,
            config_sha256: sha256_file(config_path)?,
            meshes,
        })
    }

    /// `# key: value` lines for the top of CSV files.
    pub fn csv_header(&self) -> String {
        let mode = serde_json::to_value(self.mode)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let mut s = format!(
            "# {} {}\n# mode: {mode}\n# config sha256: {}\n",
            self.program, self.version, self.config_sha256
        );
        for m in &self.meshes {
            s += &format!("# mesh {}: sha256 {}\n", m.file, m.sha256);
        }
        s
    }
}

pub struct RunContext<'a> {
    pub cfg: &'a RunConfig,
    pub out: PathBuf,
    pub provenance: Provenance,
}

fn load(path: &Path) -> Result<TetMesh> {
    let mesh = load_msh(path).with_context(|| format!("loading mesh {}", path.display()))?;
    log::info!(
        "{}: {} tets, {} boundary triangles, h = {:.4}",
        path.display(),
        mesh.n_tets(),
        mesh.boundary.len(),
        mesh.h()
    );
    Ok(mesh)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn split(v: &[c64]) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|z| z.re).collect(),
        v.iter().map(|z| z.im).collect(),
    )
}

fn parts_json(p: &NormParts) -> serde_json::Value {
    json!({
        "volume": p.volume.sqrt(),
        "curl": p.curl.sqrt(),
        "jump": p.jump.sqrt(),
        "psi_half": p.psi_half.sqrt(),
        "lambda_minus_half": p.lambda_minus_half.sqrt(),
        "total": p.norm(),
        "total_star": p.norm_star(),
    })
}

fn x0(cfg: &RunConfig, mesh: &TetMesh) -> Vec3 {
    cfg.manufactured
        .as_ref()
        .and_then(|m| m.x0)
        .map_or_else(|| default_source(mesh), Vec3::from)
}

fn seconds(ctx: &RunContext, start: Instant) -> f64 {
    if ctx.cfg.deterministic {
        0.0
    } else {
        start.elapsed().as_secs_f64()
    }
}

pub fn solve(ctx: &RunContext) -> Result<()> {
    let start = Instant::now();
    let cfg = ctx.cfg;
    let mesh = load(&cfg.meshes[0])?;
    let mat = cfg.materials();
    let disc = Discretization::new(&mesh, cfg.m, &mat, &cfg.quad())?;
    let mut diagnostics = serde_json::Map::new();

    let (sys, exact) = if cfg.manufactured_enabled() {
        let pot = cfg
            .manufactured
            .as_ref()
            .map(|m| m.potential)
            .unwrap_or_default();
        let exact = make_exact(&mesh, &mat, x0(cfg, &mesh), pot)?;
        (manufactured_system(&disc, &exact)?, Some(exact))
    } else {
        let mut sys = disc.system()?;
        if let Some(j) = cfg.source {
            let j = CVec3::new(
                c64::new(j[0], 0.0),
                c64::new(j[1], 0.0),
                c64::new(j[2], 0.0),
            );
            let lh = dg::assemble_lh(&mesh, &disc.spaces, &mat, &disc.quad, &|_, _| j, None)?;
            sys.add_load(&lh)?;
        }
        (sys, None)
    };
    if cfg.dump_system {
        let path = ctx.out.join("system.bin");
        let mut f = std::io::BufWriter::new(
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        sys.write_binary(&mut f)?;
    }
    let sol: CoupledSolution = sys.solve()?;
    let norms = dg::norm_parts(
        &disc.dg,
        &disc.bem,
        &disc.spaces,
        mat.mu0,
        &sol.volume_pair(),
        &sol.lambda,
    )?;
    diagnostics.insert("unknowns".into(), json!({
        "x": disc.spaces.n_x(), "psi": disc.spaces.n_psi(), "lambda": disc.spaces.n_lambda(), "total": sys.dim(),
    }));
    diagnostics.insert("residual".into(), json!(sol.residual));
    diagnostics.insert("pivot_ratio".into(), json!(sol.pivot_ratio));
    diagnostics.insert("field_norms".into(), parts_json(&norms));
    if let Some(exact) = &exact {
        let err = measure_error(&disc, exact, &sol)?;
        let probes: Vec<Probe> = probe(&disc, exact, &sol, &default_probes(&mesh))?;
        diagnostics.insert("error".into(), parts_json(&err));
        diagnostics.insert("probes".into(), serde_json::to_value(probes)?);
        diagnostics.insert(
            "psi_offset".into(),
            json!([sol.psi_offset.re, sol.psi_offset.im]),
        );
        diagnostics.insert(
            "lambda_offset".into(),
            json!([sol.lambda_offset.re, sol.lambda_offset.im]),
        );
    }
    diagnostics.insert("seconds".into(), json!(seconds(ctx, start)));
    diagnostics.insert("provenance".into(), serde_json::to_value(&ctx.provenance)?);
    write_json(
        &ctx.out.join("diagnostics.json"),
        &serde_json::Value::Object(diagnostics),
    )?;

    let (u_re, u_im) = split(&sol.u);
    let (p_re, p_im) = split(&sol.psi);
    let (l_re, l_im) = split(&sol.lambda);
    write_json(
        &ctx.out.join("solution.json"),
        &json!({
            "provenance": ctx.provenance,
            "m": cfg.m,
            "u": { "re": u_re, "im": u_im },
            "psi": { "re": p_re, "im": p_im },
            "lambda": { "re": l_re, "im": l_im },
            "multipliers": sol.multipliers.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "psi_offset": [sol.psi_offset.re, sol.psi_offset.im],
            "lambda_offset": [sol.lambda_offset.re, sol.lambda_offset.im],
        }),
    )?;
    println!(
        "solve: {} unknowns, residual {:.2e}, field norm {:.6e}",
        sys.dim(),
        sol.residual,
        norms.norm()
    );
    Ok(())
}

pub fn convergence(ctx: &RunContext) -> Result<()> {
    let cfg = ctx.cfg;
    let meshes: Vec<TetMesh> = cfg.meshes.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let study = StudyConfig {
        m: cfg.m,
        materials: cfg.materials(),
        quad: cfg.quad(),
        potential: cfg
            .manufactured
            .as_ref()
            .map(|m| m.potential)
            .unwrap_or_default(),
        x0: Some(x0(cfg, &meshes[0])),
    };
    let mut report: ErrorReport = run_convergence(&meshes, &study)?;
    if cfg.deterministic {
        report.rows.iter_mut().for_each(|r| r.seconds = 0.0);
    }
    fs::write(
        ctx.out.join("errors.csv"),
        ctx.provenance.csv_header() + &report.to_csv(),
    )
    .context("writing errors.csv")?;
    write_json(
        &ctx.out.join("errors.json"),
        &json!({ "provenance": ctx.provenance, "report": report }),
    )?;
    for (r, e) in report
        .rows
        .iter()
        .zip(std::iter::once(None).chain(report.eoc.iter().map(Some)))
    {
        match e {
            Some(e) => println!("h = {:.4}  error = {:.4e}  EOC = {e:.3}", r.h, r.total),
            None => println!("h = {:.4}  error = {:.4e}", r.h, r.total),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MeshVerify {
    file: String,
    triangles: usize,
    spectral: Vec<SpectralRow>,
    calderon: CalderonResiduals,
}

pub fn bem_verify(ctx: &RunContext) -> Result<()> {
    let cfg = ctx.cfg;
    let quad = cfg.quad();
    let mat = cfg.materials();
    let mut out = Vec::new();
    let mut csv = ctx.provenance.csv_header() + "mesh,operator,n,computed,exact,deviation\n";
    for (path, hash) in cfg.meshes.iter().zip(&ctx.provenance.meshes) {
        let mesh = load(path)?;
        let spectral = spectral_table(&mesh, cfg.m, &quad)?;
        let sp = build_spaces(&mesh, cfg.m)?;
        let bem = BemMatrices::assemble(&mesh, &sp, &quad)?;
        let exact = make_exact(
            &mesh,
            &mat,
            x0(cfg, &mesh),
            eddykit_core::manufactured::Potential::Zero,
        )?;
        let calderon = calderon_residuals(&mesh, &sp, &bem, &quad, &exact)?;
        for r in &spectral {
            csv += &format!(
                "{},{},{},{:.10e},{:.10e},{:.4e}\n",
                hash.file, r.operator, r.n, r.computed, r.exact, r.deviation
            );
            println!(
                "{}: {} n={} {:.6} (exact {:.6})",
                hash.file, r.operator, r.n, r.computed, r.exact
            );
        }
        println!(
            "{}: Calderon residuals {:.3e} / {:.3e}",
            hash.file, calderon.interior, calderon.exterior
        );
        out.push(MeshVerify {
            file: hash.file.clone(),
            triangles: mesh.boundary.len(),
            spectral,
            calderon,
        });
    }
    fs::write(ctx.out.join("spectral.csv"), csv).context("writing spectral.csv")?;
    write_json(
        &ctx.out.join("bem_verify.json"),
        &json!({ "provenance": ctx.provenance, "meshes": out }),
    )?;
    Ok(())
}
