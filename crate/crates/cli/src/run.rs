//! Mode runners. Each returns the full output file as a string.

use std::fmt::Write;

use anyhow::{bail, Context, Result};
use gsmvlc::analysis::{
    demapper_transfer, estimate_ami, estimate_complexity, find_threshold, ComplexityInputs, PexitConfig, PriorMix,
};
use gsmvlc::channel::{build_gain_matrix, osnr_to_sigma};
use gsmvlc::demapper::Demapper;
use gsmvlc::gsm::GsmConstellation;
use gsmvlc::link::{lift_seed, simulate_point, sweep_ber, ErrorStats, LinkSystem};
use gsmvlc::protograph::{lift, write_alist};
use gsmvlc::rng::derive_seed;

use crate::config::{DumpTarget, ExperimentSpec, Mode, CONFIG_END};

/// Runs a validated spec and renders its output file.
pub fn run(spec: &ExperimentSpec) -> Result<String> {
    let errs = spec.validate();
    if !errs.is_empty() {
        bail!("invalid configuration:\n  {}", errs.join("\n  "));
    }
    match spec.experiment.mode {
        Mode::BerSweep => ber_sweep(spec),
        Mode::AmiSweep => ami_sweep(spec),
        Mode::ExitTransfer => exit_transfer(spec),
        Mode::Threshold => threshold(spec),
        Mode::TableDump => table_dump(spec),
        Mode::Complexity => complexity(spec),
    }
}

/// Resolved config as `#` lines, the separator, then the column header.
fn csv_header(spec: &ExperimentSpec, columns: &str) -> String {
    let mut out = String::new();
    for line in spec.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "{CONFIG_END}\n# {columns}").unwrap();
    out
}

fn constellation(spec: &ExperimentSpec) -> Result<GsmConstellation> {
    let g = spec.gsm.context("missing [gsm]")?;
    Ok(GsmConstellation::build(spec.gsm_config().context("missing [gsm]")?, g.kind)?)
}

fn rate(spec: &ExperimentSpec) -> Result<f64> {
    if let Some(r) = spec.analysis.rate {
        return Ok(r);
    }
    let code = spec.code.context("missing [code]")?;
    Ok(code.family.base_matrix(code.e)?.rate())
}

fn ber_sweep(spec: &ExperimentSpec) -> Result<String> {
    let cfg = spec.link_config().context("missing [code] or [gsm]")?;
    let mut out = csv_header(spec, ErrorStats::CSV_HEADER);
    for s in sweep_ber(&cfg)? {
        writeln!(out, "{}", s.csv_row())?;
    }
    Ok(out)
}

fn ami_sweep(spec: &ExperimentSpec) -> Result<String> {
    let c = constellation(spec)?;
    let h = build_gain_matrix(&spec.channel)?;
    let dem = Demapper::new(&c, &h);
    let r = rate(spec)?;
    let mut out = csv_header(spec, "osnr_db,i_spd,se_spd,i_sid,se_sid,i_bicgsm,se_bicgsm");
    for (i, &o) in spec.link.osnr_db.iter().enumerate() {
        let sigma = osnr_to_sigma(&h, &c, r, o);
        let a = estimate_ami(&dem, c.rho_d(), sigma, spec.analysis.samples, derive_seed(spec.experiment.seed, i as u64));
        writeln!(out, "{o},{},{},{},{},{},{}", a.i_spd, a.se_spd, a.i_sid, a.se_sid, a.i_bicgsm, a.se_bicgsm)?;
    }
    Ok(out)
}

fn exit_transfer(spec: &ExperimentSpec) -> Result<String> {
    let c = constellation(spec)?;
    let h = build_gain_matrix(&spec.channel)?;
    let dem = Demapper::new(&c, &h);
    let r = rate(spec)?;
    let mut out = csv_header(spec, "osnr_db,i_a,i_e_spd,se_spd,i_e_sid,se_sid,i_e");
    let mut probe = 0u64;
    for &o in &spec.link.osnr_db {
        let sigma = osnr_to_sigma(&h, &c, r, o);
        for &mi in &spec.analysis.prior_mi {
            let t = demapper_transfer(
                &dem,
                c.rho_d(),
                sigma,
                &PriorMix::uniform(mi),
                spec.analysis.samples,
                derive_seed(spec.experiment.seed, probe),
            );
            probe += 1;
            writeln!(out, "{o},{mi},{},{},{},{},{}", t.i_d, t.se_d, t.i_s, t.se_s, t.per_bit(c.rho_d(), c.rho_s()))?;
        }
    }
    Ok(out)
}

fn threshold(spec: &ExperimentSpec) -> Result<String> {
    let code = spec.code.context("missing [code]")?;
    let base = code.family.base_matrix(code.e)?;
    let c = constellation(spec)?;
    let h = build_gain_matrix(&spec.channel)?;
    let cfg = PexitConfig { g1: spec.link.g1, g2: spec.link.g2, samples: spec.analysis.samples, seed: spec.experiment.seed };
    let (lo, hi) = (spec.analysis.osnr_lo.unwrap_or_default(), spec.analysis.osnr_hi.unwrap_or_default());
    let t = find_threshold(&base, &c, &h, &cfg, lo, hi)?;
    let mut out = csv_header(spec, "family,e,rate,kind,rho,d_tx,samples,probes,threshold_db");
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        code.family,
        code.e,
        base.rate(),
        c.kind(),
        c.rho(),
        spec.channel.d_tx,
        cfg.samples,
        t.probes.len(),
        t.threshold_db
    )?;
    Ok(out)
}

fn table_dump(spec: &ExperimentSpec) -> Result<String> {
    Ok(match spec.analysis.dump {
        DumpTarget::Constellation => {
            let table = constellation(spec)?.to_csv();
            let (columns, rows) = table.split_once('\n').context("empty table")?;
            csv_header(spec, columns) + rows
        }
        DumpTarget::Gain => {
            let h = build_gain_matrix(&spec.channel)?;
            let columns: Vec<String> = (1..=h.n_t()).map(|j| format!("led_{j}")).collect();
            csv_header(spec, &columns.join(",")) + &h.to_csv()
        }
        DumpTarget::BaseMatrix => {
            let code = spec.code.context("missing [code]")?;
            code.family.base_matrix(code.e)?.to_json()? + "\n"
        }
        DumpTarget::Alist => {
            let code = spec.code.context("missing [code]")?;
            let base = code.family.base_matrix(code.e)?;
            write_alist(lift(&base, code.z, lift_seed(spec.experiment.seed))?.parity_check())
        }
        DumpTarget::Geometry => spec.channel.to_json() + "\n",
    })
}

fn complexity(spec: &ExperimentSpec) -> Result<String> {
    let code = spec.code.context("missing [code]")?;
    let rho = spec.gsm_config().context("missing [gsm]")?.rho() as u32;
    let (n_t, n_r) = (spec.channel.n_t, spec.channel.n_r);
    let mut out = csv_header(
        spec,
        "osnr_db,n,m,p,avg_vn_degree,avg_cn_degree,T1,T2,rho,N_t,N_r,demap_ra,demap_rm,decode_ra,decode_rm,ra,rm",
    );
    let (lifted, points) = match (spec.analysis.t1, spec.analysis.t2) {
        (Some(t1), Some(t2)) => {
            let base = code.family.base_matrix(code.e)?;
            (lift(&base, code.z, lift_seed(spec.experiment.seed))?, vec![(String::new(), t1, t2)])
        }
        _ => {
            let lc = spec.link_config().context("missing [code] or [gsm]")?;
            let sys = LinkSystem::new(&lc)?;
            let mut v = Vec::new();
            for &o in &spec.link.osnr_db {
                let s = simulate_point(&sys, o, &lc.stop, lc.seed)?;
                v.push((o.to_string(), s.avg_t1(), s.avg_t2()));
            }
            (sys.code().clone(), v)
        }
    };
    for (osnr, t1, t2) in points {
        let x = ComplexityInputs::for_code(&lifted, t1, t2, rho, n_t, n_r);
        let e = estimate_complexity(&x);
        writeln!(
            out,
            "{osnr},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            x.n, x.m, x.p, x.avg_vn_degree, x.avg_cn_degree, x.t1, x.t2, x.rho, x.n_t, x.n_r,
            e.demap_ra, e.demap_rm, e.decode_ra, e.decode_rm, e.ra, e.rm
        )?;
    }
    Ok(out)
}
