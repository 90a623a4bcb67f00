//! The five CSV-producing commands.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use trispin_core::eigensolver::{ground_manifold, EigenOptions, GroundManifold, ManifoldOptions};
use trispin_core::lattice::{GeometryTag, LatticeSpec};
use trispin_core::observables::{
    chiral_map, dimer_map, manifold_spin_values, mean_chirality, momentum_numbers, representative,
    spin_map, CorrelationMap,
};
use trispin_core::witness::{witness_ex, ThreeSpinDensity, WitnessOptions};

use crate::config::RunConfig;
use crate::output::{fmt_f64, write_csv, Row};

fn manifold_options(cfg: &RunConfig) -> ManifoldOptions {
    ManifoldOptions {
        eigen: EigenOptions {
            k: cfg.k_eigen,
            tol: cfg.tol,
            seed: cfg.seed,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Run `f` over the coupling grid, in parallel up to the configured worker
/// count, preserving grid order in the output.
fn grid_map<F>(cfg: &RunConfig, f: F) -> Result<Vec<Vec<Row>>>
where
    F: Fn(usize, f64) -> Vec<Row> + Sync,
{
    use rayon::prelude::*;
    let grid = cfg.lambda_grid();
    let run = || {
        grid.par_iter()
            .enumerate()
            .map(|(i, &lambda)| f(i, lambda))
            .collect::<Vec<_>>()
    };
    if cfg.workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .context("building worker pool")?;
        Ok(pool.install(run))
    }
}

fn geometry(cfg: &RunConfig) -> Result<LatticeSpec> {
    if cfg.geometry.is_empty() {
        bail!("no geometry given (use --geometry or a config file)");
    }
    let spec = LatticeSpec::from_tag(&cfg.geometry)?;
    let violations = spec.validate();
    if !violations.is_empty() {
        bail!("geometry `{}` failed validation: {:?}", cfg.geometry, violations[0]);
    }
    Ok(spec)
}

fn fmt_plain(x: f64) -> String {
    format!("{x}")
}

fn sz_of(n_sites: usize, n_up: usize) -> f64 {
    (2.0 * n_up as f64 - n_sites as f64) / 2.0
}

fn fmt_phase(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x == std::f64::consts::PI {
        "pi".to_string()
    } else {
        fmt_f64(x)
    }
}

fn spectrum_fields(
    spec: &LatticeSpec,
    lambda: f64,
    m: &GroundManifold,
    with_momentum: bool,
) -> Vec<String> {
    let n = spec.n_sites as f64;
    let spins: Vec<String> = manifold_spin_values(m).into_iter().map(fmt_plain).collect();
    let mut szs: Vec<f64> = m.vectors.iter().map(|v| sz_of(spec.n_sites, v.n_up)).collect();
    szs.sort_by(f64::total_cmp);
    szs.dedup_by(|a, b| a == b);
    let sz_list: Vec<String> = szs.into_iter().map(fmt_plain).collect();
    let mut fields = vec![
        fmt_f64(lambda),
        fmt_f64(m.e0),
        fmt_f64(m.e0 / n),
        m.degeneracy.to_string(),
        m.gap.map(fmt_f64).unwrap_or_default(),
        spins.join(";"),
        sz_list.join(";"),
    ];
    if with_momentum {
        let ks = momentum_numbers(m, spec)
            .map(|ks| {
                ks.iter()
                    .map(|(kr, kc)| format!("{}:{}", fmt_phase(*kr), fmt_phase(*kc)))
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default();
        fields.push(ks);
    }
    fields
}

/// One row per coupling: ground energy, degeneracy, gap, spin content and
/// (on a torus) the translation quantum numbers.
pub fn cmd_spectrum(cfg: &RunConfig) -> Result<i32> {
    let spec = geometry(cfg)?;
    let with_momentum = spec.torus_shape().is_some();
    let mut header = vec![
        "lambda",
        "e0",
        "energy_per_site",
        "degeneracy",
        "gap",
        "total_spin",
        "sz_list",
    ];
    if with_momentum {
        header.push("momentum_list");
    }
    header.push("status");
    let opts = manifold_options(cfg);
    let width = header.len();
    let rows = grid_map(cfg, |_, lambda| {
        match ground_manifold(&spec, lambda, &opts) {
            Ok(m) => vec![Row::ok(spectrum_fields(&spec, lambda, &m, with_momentum))],
            Err(e) => vec![Row::failed(vec![fmt_f64(lambda)], width, &e.to_string())],
        }
    })?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_csv(cfg.out.as_deref(), &header, &rows, &[])
}

/// Mean ground-state chirality across the coupling grid, plus the detected
/// jump location (first grid coupling with mean chirality above 0.05).
pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let spec = geometry(cfg)?;
    let header = ["lambda", "mean_chirality", "e0_per_site", "status"];
    let opts = manifold_options(cfg);
    let n = spec.n_sites as f64;
    let rows = grid_map(cfg, |_, lambda| {
        match ground_manifold(&spec, lambda, &opts) {
            Ok(m) => {
                let mc = mean_chirality(&m, &spec);
                vec![Row::ok(vec![fmt_f64(lambda), fmt_f64(mc), fmt_f64(m.e0 / n)])]
            }
            Err(e) => vec![Row::failed(vec![fmt_f64(lambda)], header.len(), &e.to_string())],
        }
    })?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    let jump = rows
        .iter()
        .find(|r| {
            r.ok && r.fields[1].parse::<f64>().map(|v| v > 0.05).unwrap_or(false)
        })
        .map(|r| r.fields[0].clone())
        .unwrap_or_else(|| "none".to_string());
    write_csv(cfg.out.as_deref(), &header, &rows, &[format!("jump_lambda={jump}")])
}

enum RefSpec {
    Site(usize),
    Bond(usize, usize),
    Triple(usize, usize, usize),
}

fn parse_reference(s: &str) -> Result<RefSpec> {
    let parts: Vec<usize> = s
        .split('-')
        .map(|t| t.trim().parse::<usize>().map_err(|_| anyhow!("bad site index `{t}` in reference `{s}`")))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [a] => Ok(RefSpec::Site(*a)),
        [a, b] => Ok(RefSpec::Bond(*a, *b)),
        [a, b, c] => Ok(RefSpec::Triple(*a, *b, *c)),
        _ => bail!("reference `{s}` must be a site `i`, bond `i-j`, or plaquette `i-j-k`"),
    }
}

/// Connected correlators from a reference object to every object of the
/// same kind: site → spin-spin, bond → dimer-dimer, plaquette →
/// chirality-chirality.
pub fn cmd_correlations(cfg: &RunConfig) -> Result<i32> {
    let spec = geometry(cfg)?;
    let reference = cfg
        .reference
        .as_deref()
        .ok_or_else(|| anyhow!("correlations needs --reference (site `i`, bond `i-j`, or plaquette `i-j-k`)"))?;
    let refspec = parse_reference(reference)?;
    if let RefSpec::Triple(a, b, c) = refspec {
        if spec.find_plaquette([a, b, c]).is_none() {
            bail!("reference plaquette {a}-{b}-{c} is not a plaquette of `{}`", cfg.geometry);
        }
    }
    for s in match refspec {
        RefSpec::Site(a) => vec![a],
        RefSpec::Bond(a, b) => vec![a, b],
        RefSpec::Triple(a, b, c) => vec![a, b, c],
    } {
        if s >= spec.n_sites {
            bail!("reference site {s} out of range for `{}`", cfg.geometry);
        }
    }

    let header = ["lambda", "target", "distance", "value", "status"];
    let opts = manifold_options(cfg);
    let rows = grid_map(cfg, |_, lambda| {
        let m = match ground_manifold(&spec, lambda, &opts) {
            Ok(m) => m,
            Err(e) => {
                return vec![Row::failed(vec![fmt_f64(lambda)], header.len(), &e.to_string())]
            }
        };
        let rep = match representative(&m) {
            Some(r) => r,
            None => return vec![Row::failed(vec![fmt_f64(lambda)], header.len(), "empty manifold")],
        };
        let map: CorrelationMap = match refspec {
            RefSpec::Site(a) => spin_map(&rep.vector, &spec, a),
            RefSpec::Bond(a, b) => dimer_map(&rep.vector, &spec, (a, b)),
            RefSpec::Triple(a, b, c) => {
                let p = spec.find_plaquette([a, b, c]).expect("validated above");
                chiral_map(&rep.vector, &spec, p.sites())
            }
        };
        map.values
            .iter()
            .map(|(target, distance, value)| {
                Row::ok(vec![
                    fmt_f64(lambda),
                    target.to_string(),
                    fmt_f64(*distance),
                    value.map(fmt_f64).unwrap_or_default(),
                ])
            })
            .collect()
    })?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_csv(cfg.out.as_deref(), &header, &rows, &[])
}

/// Text state file: one `re im` pair per line, 8 lines for a pure state or
/// 64 for a row-major 8×8 density.
fn read_state_file(path: &Path) -> Result<ThreeSpinDensity> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading state file {}", path.display()))?;
    let mut values = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .ok_or_else(|| anyhow!("{}:{}: empty line", path.display(), lineno + 1))?
            .parse()
            .with_context(|| format!("{}:{}: bad real part", path.display(), lineno + 1))?;
        let im: f64 = it
            .next()
            .ok_or_else(|| anyhow!("{}:{}: missing imaginary part", path.display(), lineno + 1))?
            .parse()
            .with_context(|| format!("{}:{}: bad imaginary part", path.display(), lineno + 1))?;
        if it.next().is_some() {
            bail!("{}:{}: expected exactly `re im`", path.display(), lineno + 1);
        }
        values.push(num_complex::Complex64::new(re, im));
    }
    match values.len() {
        8 => {
            let mut amps = [num_complex::Complex64::new(0.0, 0.0); 8];
            amps.copy_from_slice(&values);
            let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
            if norm2 < 1e-12 {
                bail!("{}: pure state has zero norm", path.display());
            }
            Ok(ThreeSpinDensity::from_pure(&amps))
        }
        64 => {
            let rho = ndarray::Array2::from_shape_fn((8, 8), |(r, c)| values[r * 8 + c]);
            ThreeSpinDensity::from_matrix(rho)
                .map_err(|e| anyhow!("{}: invalid density: {e}", path.display()))
        }
        n => bail!("{}: expected 8 amplitudes or 64 density entries, got {n}", path.display()),
    }
}

/// Chirality witness of an external state file, or of ground-state
/// plaquette triples across the coupling grid.
pub fn cmd_witness(cfg: &RunConfig) -> Result<i32> {
    if let Some(path) = &cfg.state_file {
        let rho = read_state_file(path)?;
        let res = witness_ex(&rho, &WitnessOptions { seed: cfg.seed, ..Default::default() })
            .map_err(|e| anyhow!("witness optimization failed: {e}"))?;
        let header = ["chi_raw", "chi_max", "e_x", "class", "status"];
        let rows = vec![Row::ok(vec![
            fmt_f64(res.chi_raw),
            fmt_f64(res.chi_max),
            fmt_f64(res.e_x),
            res.class.to_string(),
        ])];
        return write_csv(cfg.out.as_deref(), &header, &rows, &[]);
    }

    let spec = geometry(cfg)?;
    let triples: Vec<(usize, usize, usize)> = match &cfg.reference {
        Some(r) => match parse_reference(r)? {
            RefSpec::Triple(a, b, c) => vec![(a, b, c)],
            _ => bail!("witness reference must be a triple `i-j-k`"),
        },
        None => spec.plaquettes.iter().map(|p| p.sites()).collect(),
    };
    if triples.is_empty() {
        bail!("geometry `{}` has no plaquettes and no --reference was given", cfg.geometry);
    }
    let header = ["lambda", "triple", "chi_raw", "chi_max", "e_x", "class", "status"];
    let opts = manifold_options(cfg);
    let rows = grid_map(cfg, |i_lambda, lambda| {
        let m = match ground_manifold(&spec, lambda, &opts) {
            Ok(m) => m,
            Err(e) => {
                return vec![Row::failed(vec![fmt_f64(lambda)], header.len(), &e.to_string())]
            }
        };
        let rep = match representative(&m) {
            Some(r) => r,
            None => return vec![Row::failed(vec![fmt_f64(lambda)], header.len(), "empty manifold")],
        };
        triples
            .iter()
            .enumerate()
            .map(|(i_triple, &(a, b, c))| {
                let label = format!("{a}-{b}-{c}");
                let rho = match trispin_core::witness::reduced_density(&rep.vector, (a, b, c)) {
                    Ok(rho) => rho,
                    Err(e) => {
                        return Row::failed(
                            vec![fmt_f64(lambda), label],
                            header.len(),
                            &e.to_string(),
                        )
                    }
                };
                let wopts = WitnessOptions {
                    seed: cfg.seed ^ ((i_lambda as u64) << 24) ^ (i_triple as u64),
                    ..Default::default()
                };
                match witness_ex(&rho, &wopts) {
                    Ok(res) => Row::ok(vec![
                        fmt_f64(lambda),
                        label,
                        fmt_f64(res.chi_raw),
                        fmt_f64(res.chi_max),
                        fmt_f64(res.e_x),
                        res.class.to_string(),
                    ]),
                    Err(e) => Row::failed(vec![fmt_f64(lambda), label], header.len(), &e.to_string()),
                }
            })
            .collect()
    })?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_csv(cfg.out.as_deref(), &header, &rows, &[])
}

/// Mean-field order parameter and energy per site for a type-A ladder,
/// the analytic transition point, and optional exact-diagonalization
/// energy columns at matching couplings.
pub fn cmd_meanfield(cfg: &RunConfig) -> Result<i32> {
    let spec = geometry(cfg)?;
    let GeometryTag::LadderA { .. } = spec.tag else {
        bail!("meanfield needs a ladder-a geometry, got `{}`", cfg.geometry);
    };
    if spec.n_sites % 2 != 0 {
        bail!("meanfield needs an even site count for the two-site spinor grouping");
    }
    let ladder_len = spec.n_sites / 2;
    for &size in &cfg.ed_sizes {
        if size % 2 != 0 {
            bail!(
                "ed-sizes must be even: a periodic type-A ladder with {size} sites cannot \
                 carry a consistent alternating plaquette orientation (use the bracketing \
                 even sizes instead)"
            );
        }
    }
    let ed_specs: Vec<LatticeSpec> = cfg
        .ed_sizes
        .iter()
        .map(|&s| trispin_core::lattice::build_ladder_a(s, true).map_err(Into::into))
        .collect::<Result<_>>()?;

    let lambda_c = trispin_core::meanfield::transition_point();
    let mut header = vec![
        "lambda".to_string(),
        "alpha".to_string(),
        "mf_energy_per_site".to_string(),
        "lambda_c".to_string(),
    ];
    for size in &cfg.ed_sizes {
        header.push(format!("ed_epsite_n{size}"));
    }
    header.push("status".to_string());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let opts = manifold_options(cfg);
    let rows = grid_map(cfg, |_, lambda| {
        let mf = match trispin_core::meanfield::solve_self_consistent(lambda, ladder_len) {
            Ok(s) => s,
            Err(e) => {
                return vec![Row::failed(vec![fmt_f64(lambda)], header_refs.len(), &e.to_string())]
            }
        };
        let mut fields = vec![
            fmt_f64(lambda),
            fmt_f64(mf.alpha),
            fmt_f64(mf.energy_per_site),
            fmt_f64(lambda_c),
        ];
        for ed in &ed_specs {
            match ground_manifold(ed, lambda, &opts) {
                Ok(m) => fields.push(fmt_f64(m.e0 / ed.n_sites as f64)),
                Err(e) => {
                    return vec![Row::failed(fields, header_refs.len(), &e.to_string())];
                }
            }
        }
        vec![Row::ok(fields)]
    })?;
    let rows: Vec<Row> = rows.into_iter().flatten().collect();
    write_csv(cfg.out.as_deref(), &header_refs, &rows, &[])
}
