//! Acceptance run: nine end-to-end criteria, one PASS/FAIL line each.
//!
//! Built without the libtest harness so the report always prints; the process
//! exits non-zero when any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lsc::canon::canonicalize;
use lsc::circuit::{parse_circuit, Basis, Circuit, InitState};
use lsc::estimate::{compare_table, estimate, Baseline, ResourceEstimate};
use lsc::fixtures;
use lsc::icm::{check_equivalence_small, icm_control_gadget_rules, invert_icm};
use lsc::pauli::Sign;
use lsc::random::random_inverted_icm;
use lsc::schedule::{
    emit_schedule, expand_general_cnot, interpret_prefix, interpret_schedule, naive_schedule, simulate_schedule, validate_schedule,
    InterpretError, SurgerySchedule,
};
use lsc::stabilizer::{circuit_state, Outcomes, StabilizerMatrix};
use lsc::statevec::{self, phase_merge, PhaseCorrection, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:?}, limit {limit:?}"))
}

fn fixture_schedule(name: &str) -> Result<SurgerySchedule, String> {
    let f = fixtures::by_name(name).ok_or(format!("no fixture {name}"))?;
    emit_schedule(&f.program(), &f.layout(), &[]).map_err(|e| e.to_string())
}

fn canonical(m: &StabilizerMatrix) -> Result<StabilizerMatrix, String> {
    m.canonical_form().map_err(|e| e.to_string())
}

fn random_ket(rng: &mut ChaCha8Rng) -> [Complex64; 2] {
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / n, b / n]
}

/// Two-CNOT circuit: naive layout, full interpretation, canonical stabilizers.
fn criterion_1() -> Check {
    let start = Instant::now();
    let s = fixture_schedule("two-cnot")?;
    let got = interpret_schedule(&s, &mut Outcomes::AllPlus).map_err(|e| e.to_string())?;
    let want = StabilizerMatrix::parse(&["ZZZ", "XXI", "IXX"]).map_err(|e| e.to_string())?;
    ensure(canonical(&got.state)? == canonical(&want)?, format!("got\n{}", got.state))?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("{} timesteps, stabilizers {{ZZZ, XXI, IXX}}", s.num_timesteps()))
}

/// Steane: the state before injection equals the hand-derived 8-qubit matrix.
/// The literal matrix has X row {2,5,7,8}, which anticommutes with Z row
/// {1,2,3,6}; the circuit's own X stabilizer there is X1 X4 X6 X7.
fn criterion_2() -> Check {
    let start = Instant::now();
    let literal = [
        "IIXXXXII", "IXIIXIXX", "IXIIXXXI", "IIIXXIXX", "ZZZIIZII", "ZZIIIIZZ", "ZIZZIIIZ", "IZZIZIIZ",
    ];
    ensure(StabilizerMatrix::parse(&literal).is_err(), "literal matrix unexpectedly commutes")?;
    let mut rows = literal;
    rows[1] = "XIIXIXXI";
    let want = StabilizerMatrix::parse(&rows).map_err(|e| e.to_string())?;
    let s = fixture_schedule("steane")?;
    let got = interpret_prefix(&s, s.entangling_steps(), &mut Outcomes::AllPlus).map_err(|e| e.to_string())?;
    ensure(got.qubits == (0..8).map(Some).collect::<Vec<_>>(), "columns are not qubits 1..8")?;
    ensure(canonical(&got.state)? == canonical(&want)?, format!("got\n{}", got.state))?;
    within(start, Duration::from_secs(1))?;
    Ok("matches after canonical form (X row 2 read as X1 X4 X6 X7)".into())
}

/// Footprint, time and volume of the three distillation schedules.
fn criterion_3() -> Check {
    let mut parts = Vec::new();
    for (name, p, t, c) in [("steane", 20, 7, 280), ("reed-muller", 60, 9, 1080), ("bravyi-haah", 126, 9, 2268)] {
        let start = Instant::now();
        let e = estimate(&fixture_schedule(name)?);
        ensure(
            (e.patches, e.timesteps, e.volume_coefficient) == (p, t, c),
            format!("{name}: got P={} T={} c={}", e.patches, e.timesteps, e.volume_coefficient),
        )?;
        within(start, Duration::from_secs(1))?;
        parts.push(format!("{name} ({p}, {t}, {c})"));
    }
    Ok(parts.join(", "))
}

/// Volume ratios against braiding.
fn criterion_4() -> Check {
    let y = compare_table(&ResourceEstimate::new(20, 7), Baseline::YBraid);
    let a = compare_table(&ResourceEstimate::new(60, 9), Baseline::ABraid);
    let bh = compare_table(&ResourceEstimate::new(126, 9), Baseline::BhBraid);
    ensure((y.surgery, y.braiding, y.ratio) == (280, 140, 2.0), format!("{y}"))?;
    ensure(
        (a.surgery, a.braiding, a.ratio_num, a.ratio_den, a.ratio) == (1080, 1500, 18, 25, 0.72),
        format!("{a}"),
    )?;
    ensure((bh.surgery, bh.braiding) == (2268, 4688), format!("{bh}"))?;
    ensure((bh.ratio - 0.483_788_395_904_436_8).abs() < 1e-12, format!("{bh}"))?;
    Ok(format!("{}, {}, {:.5}", y.ratio, a.ratio, bh.ratio))
}

/// Random inverted-ICM circuits through the whole pipeline against direct simulation.
fn criterion_5() -> Check {
    let start = Instant::now();
    let (mut dense, mut skipped) = (0, 0);
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + seed);
        let c = random_inverted_icm(&mut rng, 10, 25);
        let p = canonicalize(&c).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = naive_schedule(&p, &[]).map_err(|e| format!("seed {seed}: {e}"))?;
        let got = interpret_schedule(&s, &mut Outcomes::seeded(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
        let want = circuit_state(&c).map_err(|e| e.to_string())?;
        ensure(
            canonical(&got.state)? == canonical(&want)?,
            format!("seed {seed}: stabilizer states differ"),
        )?;
        if s.peak_live_patches() > 12 {
            skipped += 1;
            continue;
        }
        let direct = statevec::run_circuit(&c, &StateVector::scalar(), &[]).map_err(|e| e.to_string())?;
        let mut matched = false;
        for _ in 0..64 {
            let branch: Vec<bool> = (0..512).map(|_| rng.gen()).collect();
            match simulate_schedule(&s, &StateVector::scalar(), &branch) {
                Ok(run) => {
                    ensure(
                        run.state.approx_eq_up_to_phase(&direct, 1e-9),
                        format!("seed {seed}: dense states differ"),
                    )?;
                    matched = true;
                    break;
                }
                Err(InterpretError::ZeroProbability { .. }) => {}
                Err(e) => return Err(format!("seed {seed}: {e}")),
            }
        }
        ensure(matched, format!("seed {seed}: no possible branch found"))?;
        dense += 1;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "500/500 stabilizer, {dense} dense (≤ 12 live patches), {skipped} too wide for dense, {:.1?}",
        start.elapsed()
    ))
}

/// Teleportation gadgets with |A⟩ and |Y⟩ equal their inverted forms on every branch.
fn criterion_6() -> Check {
    let start = Instant::now();
    let parse = |t: &str| parse_circuit(t).map_err(|e| e.to_string());
    for (state, basis, theta) in [(InitState::A, Basis::A, FRAC_PI_4), (InitState::Y, Basis::Y, FRAC_PI_2)] {
        ensure(basis.theta() == Some(theta), "angle mismatch")?;
        let sym = state.symbol();
        // Rotated state as CNOT target, data measured in X.
        let target: Circuit = parse(&format!("qubits 2\ninput 0\ninit 1 {sym}\ncnot 0 -> 1\nmeasure 0 X"))?;
        let (inv, rules) = invert_icm(&target).map_err(|e| e.to_string())?;
        ensure(
            check_equivalence_small(&target, &[], &inv, &rules, 12).map_err(|e| e.to_string())?,
            format!("{sym} target gadget"),
        )?;
        ensure(
            !check_equivalence_small(&target, &[], &inv, &[], 12).map_err(|e| e.to_string())?,
            "corrections are needed",
        )?;
        // Rotated state as CNOT control, data measured in Z.
        let control: Circuit = parse(&format!("qubits 2\ninput 0\ninit 1 {sym}\ncnot 1 -> 0\nmeasure 0 Z"))?;
        let (inv, rules) = invert_icm(&control).map_err(|e| e.to_string())?;
        let frame = icm_control_gadget_rules(1, 0, state);
        ensure(
            check_equivalence_small(&control, &frame, &inv, &rules, 12).map_err(|e| e.to_string())?,
            format!("{sym} control gadget"),
        )?;
        ensure(
            !check_equivalence_small(&control, &[], &inv, &rules, 12).map_err(|e| e.to_string())?,
            "frames are needed",
        )?;
    }
    within(start, Duration::from_secs(5))?;
    Ok("target and control gadgets for θ = π/4, π/2".into())
}

/// Merging `|0⟩ + p|1⟩` into `α|0⟩ + β|1⟩` for p ∈ {i, e^{iπ/4}} and both outcomes.
fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let [alpha, beta] = random_ket(&mut rng);
        let psi = StateVector::product(&[[alpha, beta]]).map_err(|e| e.to_string())?;
        for (p, fix) in [
            (Complex64::i(), PhaseCorrection::XThenZ),
            (Complex64::from_polar(1.0, FRAC_PI_4), PhaseCorrection::XThenP),
        ] {
            for (outcome, amps) in [(Sign::Plus, [alpha, p * beta]), (Sign::Minus, [beta, p * alpha])] {
                let (got, corr) = phase_merge(&psi, 0, p, outcome).map_err(|e| e.to_string())?;
                let want = StateVector::from_amplitudes(amps.to_vec()).map_err(|e| e.to_string())?;
                let want = want.normalized().map_err(|e| e.to_string())?;
                let k = want
                    .proportionality(&got, 1e-12)
                    .ok_or(format!("p={p}, {outcome:?}: wrong state"))?;
                ensure((k.norm() - 1.0).abs() < 1e-12, "not normalized")?;
                let expected = if outcome == Sign::Plus { PhaseCorrection::None } else { fix };
                ensure(corr == expected, format!("p={p}, {outcome:?}: correction {corr:?}"))?;
                let mut fixed = got.clone();
                corr.apply(&mut fixed, 0).map_err(|e| e.to_string())?;
                let gate = StateVector::product(&[[alpha, p * beta]]).map_err(|e| e.to_string())?;
                ensure(fixed.approx_eq_up_to_phase(&gate, 1e-12), "correction does not restore the gate")?;
            }
        }
    }
    Ok("α|0⟩+pβ|1⟩ for M=0, β|0⟩+pα|1⟩ for M=1, corrections X·Z and X·P".into())
}

/// Ancilla-column CNOT on arbitrary states, on every outcome branch.
fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut branches = 0;
    for n in 1..=3 {
        let s = expand_general_cnot(n);
        ensure(validate_schedule(&s).is_empty(), "expansion is malformed")?;
        for _ in 0..5 {
            let control = random_ket(&mut rng);
            let targets: Vec<[Complex64; 2]> = (0..n).map(|_| random_ket(&mut rng)).collect();
            let mut kets = vec![control];
            kets.extend(&targets);
            let input = StateVector::product(&kets).map_err(|e| e.to_string())?;
            // α|0 T⟩ + β|1 T̄⟩ with T̄ = X T.
            let zero: Vec<[Complex64; 2]> = std::iter::once([control[0], Complex64::new(0.0, 0.0)])
                .chain(targets.iter().copied())
                .collect();
            let one: Vec<[Complex64; 2]> = std::iter::once([Complex64::new(0.0, 0.0), control[1]])
                .chain(targets.iter().map(|t| [t[1], t[0]]))
                .collect();
            let a = StateVector::product(&zero).map_err(|e| e.to_string())?;
            let b = StateVector::product(&one).map_err(|e| e.to_string())?;
            let sum: Vec<Complex64> = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x + y).collect();
            let want = StateVector::from_amplitudes(sum).map_err(|e| e.to_string())?;
            for bits in 0..1u32 << (n + 1) {
                let branch: Vec<bool> = (0..=n).map(|i| bits >> i & 1 == 1).collect();
                match simulate_schedule(&s, &input, &branch) {
                    Ok(run) => {
                        ensure(run.state.approx_eq_up_to_phase(&want, 1e-12), format!("N={n}, branch {branch:?}"))?;
                        branches += 1;
                    }
                    Err(InterpretError::ZeroProbability { .. }) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    Ok(format!("N = 1, 2, 3; {branches} branches"))
}

/// Structural invariants on random programs and every fixture.
fn criterion_9() -> Check {
    let mut schedules = Vec::new();
    for f in fixtures::ALL {
        schedules.push((
            f.name.to_string(),
            emit_schedule(&f.program(), &f.layout(), &[]).map_err(|e| e.to_string())?,
        ));
    }
    for seed in 0..300u64 {
        let c = random_inverted_icm(&mut ChaCha8Rng::seed_from_u64(0x1e55 + seed), 10, 25);
        let p = canonicalize(&c).map_err(|e| format!("seed {seed}: {e}"))?;
        let v = p.invariant_violations();
        ensure(v.is_empty(), format!("seed {seed}: {v:?}"))?;
        schedules.push((
            format!("seed {seed}"),
            naive_schedule(&p, &[]).map_err(|e| format!("seed {seed}: {e}"))?,
        ));
    }
    for (name, s) in &schedules {
        let v = validate_schedule(s);
        ensure(v.is_empty(), format!("{name}: {v:?}"))?;
        let e = estimate(s);
        ensure(e.volume_coefficient == 2 * e.patches * e.timesteps, format!("{name}: c ≠ 2PT"))?;
        ensure(e.timesteps == s.num_timesteps() as u64, format!("{name}: T mismatch"))?;
    }
    Ok(format!("{} schedules", schedules.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("two-CNOT stabilizers", criterion_1),
        ("Steane stabilizer matrix", criterion_2),
        ("resource table", criterion_3),
        ("braiding ratios", criterion_4),
        ("oracle equivalence", criterion_5),
        ("inverted-ICM equivalence", criterion_6),
        ("phase-merge table", criterion_7),
        ("multi-target CNOT", criterion_8),
        ("structural invariants", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
