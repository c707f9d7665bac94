//! Acceptance suite: one PASS/FAIL line per criterion, with runtime.
//!
//! Runs without the libtest harness so the lines reach the console.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use hapqc::cli::{gate_report, mrev8_offset_scaling, recoupling_analysis, reference_pairs};
use hapqc::config::RunConfig;
use hapqc::couplings::dipolar_coupling_hz;
use hapqc::lattice::{ChainPattern, LatticeSpec};
use hapqc::planner::{
    addressable_planes, device_plan, physical_plane_limit, plane_splitting_hz, spins_per_plane,
};
use hapqc::sequences::{
    average_hamiltonian, effective_propagator, lee_goldburg, mrev8, stroboscopic_propagator,
    AhtOptions, PlaneTarget, PulseMode, PulseSegment, PulseSequence,
};
use hapqc::spinsim::{
    collective, dipolar_hamiltonian, fidelity, propagator, trotter_propagator, unitarity_error,
    DipolarForm, Operator, SpinAxis, SpinSystemModel,
};

const ANGSTROM: f64 = 1e-10;

fn config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/nominal.conf")
}

fn nominal() -> RunConfig {
    RunConfig::from_path(&config_path()).expect("shipped config parses")
}

fn chain(n: usize) -> SpinSystemModel {
    let spec = LatticeSpec {
        n_planes: n,
        pattern: ChainPattern::Single,
        ..LatticeSpec::default()
    };
    SpinSystemModel::from_lattice(&spec, 0.0, 0.0, 0).unwrap()
}

struct Check {
    failures: Vec<String>,
    unitarity: f64,
}

impl Check {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn unitary(&mut self, u: &Operator) {
        self.unitarity = self.unitarity.max(unitarity_error(u));
    }
}

type Outcome = Result<String, String>;

fn finish(c: Check, detail: String) -> Outcome {
    if c.failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failed: {}", c.failures.join("; ")))
    }
}

fn new_check() -> Check {
    Check {
        failures: Vec::new(),
        unitarity: 0.0,
    }
}

fn couplings() -> Outcome {
    let mut c = new_check();
    let refs = reference_pairs(3.44 * ANGSTROM, 9.42 * ANGSTROM);
    let d: Vec<f64> = refs
        .iter()
        .map(|(_, r, th, _)| dipolar_coupling_hz(*r, *th).unwrap())
        .collect();
    let frozen = [
        2950.805460443156,
        368.8506825553945,
        -71.85106373350230,
        1.649696265917247,
    ];
    for (x, f) in d.iter().zip(frozen) {
        c.require(
            (x - f).abs() <= 1e-9 * f.abs(),
            format!("{x} != frozen {f}"),
        );
    }
    c.require(
        (2800.0..=3100.0).contains(&d[0].abs()),
        "nn outside 2800-3100 Hz",
    );
    let rel = |x: f64, q: f64| (x.abs() - q).abs() / q;
    c.require(rel(d[1], 375.0) <= 0.02, "nnn beyond 2% of 375 Hz");
    c.require(rel(d[2], 73.0) <= 0.03, "in-plane beyond 3% of 73 Hz");
    c.require(rel(d[3], 2.0) <= 0.30, "nnn-plane beyond 30% of 2 Hz");
    let detail = format!(
        "|d| = {:.1}, {:.1}, {:.2}, {:.3} Hz",
        d[0].abs(),
        d[1].abs(),
        d[2].abs(),
        d[3].abs()
    );
    finish(c, detail)
}

fn planner() -> Outcome {
    let mut c = new_check();
    let cfg = nominal();
    let a = cfg.lattice.chain_spacing;
    let g = cfg.device.gradient_t_per_m.unwrap();
    let split = plane_splitting_hz(g, a).unwrap();
    let planes = addressable_planes(cfg.device.bandwidth_hz.unwrap(), split).unwrap();
    let [axial, lx, ly] = cfg.device.sample_dims.unwrap();
    let limit = physical_plane_limit(axial, a).unwrap();
    let spins = spins_per_plane(lx, ly, cfg.lattice.chain_separation).unwrap();
    c.require(
        (split - 300.0).abs() / 300.0 <= 0.03,
        "splitting beyond 3% of 300 Hz",
    );
    c.require(
        (145..=155).contains(&planes),
        format!("{planes} planes outside 145-155"),
    );
    c.require(
        (limit as f64 - 1e8).abs() / 1e8 <= 0.05,
        "physical limit beyond 5% of 1e8",
    );
    c.require(
        (spins / 1e16).max(1e16 / spins) <= 1.5,
        "spins per plane beyond 1.5x of 1e16",
    );
    let plan = device_plan(&cfg.device, None).unwrap();
    c.require(plan.feasible, "boosted plan infeasible");
    let mut unboosted = cfg.device.clone();
    unboosted.gradient_t_per_m = Some(g / 100.0);
    let weak = device_plan(&unboosted, None).unwrap();
    c.require(
        !weak.overlap.pass,
        "unboosted plan passes the overlap check",
    );
    let detail = format!(
        "splitting {split:.1} Hz, {planes} planes, limit {limit}, {spins:.3e} spins/plane, unboosted overlap pass = {}",
        weak.overlap.pass
    );
    finish(c, detail)
}

fn lg_averaging(check: &mut Check) -> Outcome {
    let mut c = new_check();
    let opts = AhtOptions::default();
    let mut worst = 0.0f64;
    for n in [2, 4, 6] {
        let model = chain(n);
        let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
        let bare = model.couplings().max_abs_hz();
        let seq = lee_goldburg(50e3, 10).unwrap();
        let r = average_hamiltonian(&seq, &h, &model, &opts).unwrap();
        let rel = r.max_pair_coefficient_hz() / bare;
        worst = worst.max(rel);
        c.require(rel <= 1e-6, format!("{n}-spin residual {rel:e}"));
    }
    let model = chain(4);
    let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
    let amp = 50.0 * model.couplings().max_abs_hz();
    let seq = lee_goldburg(amp, 10).unwrap();
    let r = average_hamiltonian(&seq, &h, &model, &opts).unwrap();
    let exact = stroboscopic_propagator(&seq, &model, &h).unwrap();
    let eff = effective_propagator(&r).unwrap();
    check.unitary(&exact);
    check.unitary(&eff);
    let f = fidelity(&exact, &eff).unwrap();
    c.require(f >= 0.999, format!("fidelity {f}"));
    finish(
        c,
        format!("max residual {worst:.2e} of bare, 4-spin F(ratio 50, 10 cycles) = {f:.6}"),
    )
}

fn mrev8_properties() -> Outcome {
    let mut c = new_check();
    let model = chain(4);
    let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
    let seq = mrev8(5e-6, 1, PulseMode::Ideal, PlaneTarget::All).unwrap();
    let r = average_hamiltonian(&seq, &h, &model, &AhtOptions::default()).unwrap();
    let rel = r.max_pair_coefficient_hz() / model.couplings().max_abs_hz();
    c.require(rel <= 1e-10, format!("dipolar residual {rel:e}"));
    let s = mrev8_offset_scaling(&nominal()).unwrap();
    c.require((s - 0.4714).abs() <= 0.005, format!("scaling {s}"));
    finish(
        c,
        format!("dipolar residual {rel:.2e}, offset scaling {s:.6}"),
    )
}

fn recoupling(retained: &mut f64) -> Outcome {
    let mut c = new_check();
    let cfg = nominal();
    let (a, b) = (cfg.simulation.plane_a, cfg.simulation.plane_b);
    let model = hapqc::cli::cluster_model(&cfg).unwrap();
    c.require(
        model.n() == 6 && model.planes().len() == 3,
        "shipped config is not the 3-plane, 2-chain cluster",
    );
    let r = recoupling_analysis(&model, &cfg, a, b).unwrap();
    c.require(r.projection >= 0.9, format!("projection {}", r.projection));
    c.require(
        r.suppression >= 10.0,
        format!("suppression {}", r.suppression),
    );
    *retained = r.retained_hz;
    finish(
        c,
        format!(
            "D_AB = {:.4} Hz, projection {:.6}, off-target {:.2e} Hz (suppression {:.2e})",
            r.retained_hz, r.projection, r.off_target_hz, r.suppression
        ),
    )
}

fn gate(retained: f64, check: &mut Check) -> Outcome {
    let mut c = new_check();
    let cfg = nominal();
    let g = gate_report(&cfg, cfg.simulation.plane_a, cfg.simulation.plane_b).unwrap();
    check.unitarity = check.unitarity.max(g.unitarity_error);
    c.require(
        (g.retained_hz - retained).abs() <= 1e-9 * retained.abs(),
        format!(
            "gate uses D = {} but recoupling gave {retained}",
            g.retained_hz
        ),
    );
    let t = 1.0 / (2.0 * retained.abs());
    c.require(
        (g.entangle_time - t).abs() <= 1e-15,
        "entangling time is not 1/(2|D|)",
    );
    c.require(
        g.ideal_fidelity >= 0.999,
        format!("ideal {}", g.ideal_fidelity),
    );
    c.require(
        g.double_fidelity >= 0.999,
        format!("CNOT^2 {}", g.double_fidelity),
    );
    c.require(
        g.cluster_fidelity <= g.ideal_fidelity,
        format!("cluster {} above ideal", g.cluster_fidelity),
    );
    finish(
        c,
        format!(
            "t = {:.4} ms, ideal F = {:.10}, CNOT^2 F = {:.10}, 6-spin F = {:.6}",
            g.entangle_time * 1e3,
            g.ideal_fidelity,
            g.double_fidelity,
            g.cluster_fidelity
        ),
    )
}

/// Fitted exponent of the Trotter error against the step size.
fn trotter_slope(symmetrized: bool) -> f64 {
    let model = chain(3);
    let hd = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
    let hx = collective(SpinAxis::X, &[0, 1, 2], 3)
        .unwrap()
        .scaled(2.0 * PI * 4e3);
    let sum = hd.try_add(&hx).unwrap();
    let t = 2e-4;
    let exact = propagator(&sum, t).unwrap();
    let pts: Vec<(f64, f64)> = [16usize, 32, 64, 128]
        .iter()
        .map(|&n| {
            let u = trotter_propagator(&[hd.clone(), hx.clone()], t, n, symmetrized).unwrap();
            let err = (&u.matrix - &exact.matrix).norm();
            ((t / n as f64).ln(), err.ln())
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn hygiene(check: &Check) -> Outcome {
    let mut c = new_check();
    c.require(
        check.unitarity <= 1e-10,
        format!("unitarity error {:e}", check.unitarity),
    );
    let (p1, p2) = (trotter_slope(false), trotter_slope(true));
    c.require((p1 - 1.0).abs() <= 0.2, format!("Lie-Trotter order {p1}"));
    c.require((p2 - 2.0).abs() <= 0.2, format!("Strang order {p2}"));

    let model = chain(4);
    let h = dipolar_hamiltonian(&model, DipolarForm::FullSecular);
    let free = PulseSequence::new(vec![PulseSegment::free(1e-4)], 3).unwrap();
    let opts = AhtOptions::default();
    let r = average_hamiltonian(&free, &h, &model, &opts).unwrap();
    let diff = (&r.h_bar.matrix - &h.matrix).norm() / h.matrix.norm();
    c.require(
        diff <= opts.rel_tol,
        format!("free-evolution H-bar differs by {diff:e}"),
    );
    finish(
        c,
        format!(
            "max unitarity error {:.1e}, Trotter orders {p1:.3} / {p2:.3}, free-evolution deviation {diff:.1e}",
            check.unitarity
        ),
    )
}

fn determinism() -> Outcome {
    let mut c = new_check();
    let bin = env!("CARGO_BIN_EXE_hapqc");
    let cfg = config_path();
    let runs: [&[&str]; 7] = [
        &["couplings"],
        &["plan"],
        &["avgham", "lg"],
        &["avgham", "mrev8"],
        &["avgham", "recouple"],
        &["simulate"],
        &["gate"],
    ];
    let mut files = 0;
    for args in runs {
        let mut seen = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().unwrap();
            let out = Command::new(bin)
                .args(args)
                .arg("--config")
                .arg(&cfg)
                .arg("--out")
                .arg(dir.path())
                .output()
                .unwrap();
            c.require(
                out.status.success(),
                format!("{args:?} exited {:?}", out.status.code()),
            );
            let mut entries: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            entries.sort();
            seen.push((out.stdout, entries));
        }
        c.require(!seen[0].1.is_empty(), format!("{args:?} wrote no reports"));
        c.require(seen[0] == seen[1], format!("{args:?} differs between runs"));
        files += seen[0].1.len();
    }
    finish(
        c,
        format!("7 subcommands, {files} report files byte-identical across two runs"),
    )
}

fn report(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
        .unwrap_or_else(|_| Err("panicked".into()));
    let took = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if took <= limit => (true, d),
        Ok(d) => (false, format!("{d}; runtime over {limit:?}")),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {id} ({name}) [{:.3} s]: {detail}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    ok
}

fn main() {
    let mut check = new_check();
    let mut retained = f64::NAN;
    let results = [
        report(
            1,
            "coupling reproduction",
            Duration::from_secs(1),
            couplings,
        ),
        report(2, "planner reproduction", Duration::from_secs(1), planner),
        report(3, "LG averaging", Duration::from_secs(60), || {
            lg_averaging(&mut check)
        }),
        report(
            4,
            "MREV-8 properties",
            Duration::from_secs(10),
            mrev8_properties,
        ),
        report(5, "recoupling", Duration::from_secs(300), || {
            recoupling(&mut retained)
        }),
        report(6, "gate synthesis", Duration::from_secs(300), || {
            gate(retained, &mut check)
        }),
        report(7, "numerical hygiene", Duration::from_secs(300), || {
            hygiene(&check)
        }),
        report(8, "determinism", Duration::from_secs(600), determinism),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
