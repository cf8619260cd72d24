//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any fails or overruns its time budget.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sadic_core::boshernitzan::{
    boshernitzan_constant, min_cylinder_frequency, precedes_overapprox, scan_certificate, tau_star_block, verify_cover,
    BoshernitzanCertificate, WindowCaps,
};
use sadic_core::coding::{first_level_reaching, level_word_tower, letter_frequencies, DirectiveView, SamplingFunction};
use sadic_core::lyapunov::{check_pisot, estimate_exponents, CocycleRun};
use sadic_core::mcf::{
    cell_contains, cylinder_cell, directive_sequence, random_rational_point, Algorithm, Branch, Membership, SimplexPoint,
};
use sadic_core::spectrum::{growth_levels, periodic_spectrum, total_bandwidth, zero_measure_trend};
use sadic_core::substitution::{compose_all, Substitution};
use sadic_core::words::complexity_profile;
use sadic_core::{Letter, Word};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: sadic_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn cs() -> Vec<Substitution> {
    DirectiveView::generators_of(Algorithm::CassaigneSelmer)
}

fn gamma(b: u8) -> Substitution {
    if b == 1 {
        Substitution::gamma1()
    } else {
        Substitution::gamma2()
    }
}

fn tau_star_view(len: usize) -> DirectiveView {
    DirectiveView::periodic(&tau_star_block(), len, cs()).unwrap()
}

fn letter(a: u8) -> Letter {
    Letter::new(a).unwrap()
}

fn word_identity() -> Outcome {
    let tau_prime: Vec<Substitution> = [1, 1, 2, 1, 2, 2, 2, 1].iter().map(|&b| gamma(b)).collect();
    let w = core(core(compose_all(&tau_prime))?.apply(&"1".parse().unwrap()))?;
    ensure(w.to_string() == "1213113", || format!("got {}", w))?;
    Ok(format!("image of 1 = {}", w))
}

fn primitivity() -> Outcome {
    let m = core(Substitution::gamma1().compose(&Substitution::gamma2()))?.matrix();
    let powers: Vec<bool> = (1..=3).map(|k| m.pow(k).is_positive()).collect();
    ensure(powers == [false, false, true], || format!("positivity of powers 1..3: {:?}", powers))?;
    let b = |i, j| Substitution::brun(i, j, 4).unwrap();
    let tau = core(compose_all(&[b(1, 2), b(2, 3), b(3, 4), b(4, 1)]))?;
    let sq = tau.pow(2);
    for j in 1..=4 {
        let img = sq.image(letter(j));
        let seen: HashSet<u8> = img.as_bytes().iter().copied().collect();
        ensure(seen.len() == 4, || format!("τ²({}) = {} misses a letter", j, img))?;
    }
    Ok("M³ first positive power; every letter in every τ²(j)".into())
}

fn precedes_sets() -> Outcome {
    let dv = core(DirectiveView::new(vec![gamma(2), gamma(1), gamma(1)], cs()))?;
    let p = core(precedes_overapprox(&dv, 0, 2))?.pairs.to_words();
    ensure(p == ["11", "12", "13", "21", "31"], || format!("γ₁γ₁: {:?}", p))?;
    let b = |i, j| Substitution::brun(i, j, 4).unwrap();
    let dv = core(DirectiveView::new(
        vec![b(2, 1), b(1, 4), b(1, 3), b(1, 2)],
        DirectiveView::generators_of(Algorithm::Brun),
    ))?;
    let q = core(precedes_overapprox(&dv, 0, 3))?.pairs.to_words();
    ensure(q == ["11", "12", "13", "14", "21", "31", "41"], || format!("β₁₄β₁₃β₁₂: {:?}", q))?;
    Ok(format!("{{{}}} and {{{}}}", p.join(","), q.join(",")))
}

fn certificate_pipeline() -> Outcome {
    let dv = tau_star_view(60);
    let cert = core(scan_certificate(&dv, None, 60, WindowCaps::default()))?.ok_or("no certificate within horizon 60")?;
    let n = BigInt::from(cert.norm_bound.clone());
    let expected = BigRational::new(BigInt::one(), &n * &n * &n * BigInt::from(cert.r.clone()));
    ensure(boshernitzan_constant(&cert) == expected, || "constant is not (N³r)⁻¹".into())?;
    let r = core(level_word_tower(&dv, cert.n1, usize::MAX))?[cert.n1].min_length();
    ensure(r == cert.r, || format!("r = {} but min |w_n1| = {}", cert.r, r))?;
    ensure(core(verify_cover(&dv, &cert))?, || "cover check failed".into())?;
    Ok(format!(
        "window ({}, {}, {}, {}), N = {}, r = {}, C = {}",
        cert.n0,
        cert.n1,
        cert.n2,
        cert.n3,
        cert.norm_bound,
        cert.r,
        cert.constant()
    ))
}

fn itinerary_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut excluded) = (0, 0);
    while checked + excluded < 100 {
        let x = random_rational_point(&mut rng, 3, 128);
        let it = core(directive_sequence(&x, 30, Algorithm::CassaigneSelmer))?;
        if it.is_degenerate() {
            excluded += 1;
            continue;
        }
        let cell = core(cylinder_cell(&it.branches, Algorithm::CassaigneSelmer))?;
        let m = core(cell_contains(&cell, &x))?;
        ensure(m == Membership::Interior, || format!("own cell gives {:?}", m))?;
        for k in 0..it.branches.len() {
            let mut other = it.branches.clone();
            other[k] = if other[k] == Branch::Cs(1) { Branch::Cs(2) } else { Branch::Cs(1) };
            let cell = core(cylinder_cell(&other, Algorithm::CassaigneSelmer))?;
            ensure(!core(cell_contains(&cell, &x))?.contains(), || format!("word flipped at {} also contains x", k))?;
        }
        checked += 1;
    }
    ensure(checked > 0, || "every orbit was degenerate".into())?;
    Ok(format!("{} points, {} boundary orbits excluded", checked, excluded))
}

fn random_branches<R: Rng>(rng: &mut R, alg: Algorithm, n: usize) -> Vec<Substitution> {
    (0..n)
        .map(|_| match alg {
            Algorithm::CassaigneSelmer => gamma(rng.gen_range(1..=2)),
            Algorithm::Brun => {
                let i = rng.gen_range(1..=4u8);
                let j = loop {
                    let j = rng.gen_range(1..=4u8);
                    if j != i {
                        break j;
                    }
                };
                Substitution::brun(i, j, 4).unwrap()
            }
        })
        .collect()
}

fn abelianization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut comparisons = 0usize;
    for alg in [Algorithm::CassaigneSelmer, Algorithm::Brun] {
        for _ in 0..20 {
            let dv = core(DirectiveView::new(random_branches(&mut rng, alg, 16), DirectiveView::generators_of(alg)))?;
            let tower = core(level_word_tower(&dv, 15, usize::MAX))?;
            let d = dv.alphabet_size();
            for (n, lw) in tower.iter().enumerate() {
                let m = core(dv.segment_matrix(0, n))?;
                for a in 1..=d as u8 {
                    let w = core(lw.word(letter(a)))?;
                    let mut counts = vec![0u64; d];
                    for &b in w.as_bytes() {
                        counts[b as usize - 1] += 1;
                    }
                    for i in 0..d {
                        ensure(BigUint::from(counts[i]) == *m.get(i, a as usize - 1), || {
                            format!("{} level {} letter {}: count of {} disagrees", alg, n, a, i + 1)
                        })?;
                        comparisons += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} entries agree", comparisons))
}

/// Float-mode orbit of a uniform random point, redrawn if it touches a boundary.
fn random_float_orbit(rng: &mut ChaCha8Rng, steps: usize) -> Result<(SimplexPoint<f64>, DirectiveView), String> {
    loop {
        let e: Vec<f64> = (0..3).map(|_| -rng.gen::<f64>().ln()).collect();
        let x = core(SimplexPoint::normalized(e))?;
        let it = core(directive_sequence(&x, steps, Algorithm::CassaigneSelmer))?;
        if !it.is_degenerate() {
            return Ok((x, DirectiveView::from_itinerary(&it)));
        }
    }
}

fn frequencies() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (x, dv) = random_float_orbit(&mut rng, 200)?;
        let lw = core(first_level_reaching(&dv, letter(1), 100_000, 50_000_000))?;
        let w = core(lw.word(letter(1)))?;
        let f = core(letter_frequencies(w, 3))?;
        let err: f64 = f.iter().zip(x.coords()).map(|(q, xi)| (q.to_f64().unwrap() - xi).abs()).sum();
        ensure(err < 1e-3, || format!("‖freq − x‖₁ = {:.3e} at level {}", err, lw.level))?;
        worst = worst.max(err);
    }
    Ok(format!("largest ‖freq − x‖₁ = {:.2e}", worst))
}

struct Certified {
    label: String,
    dv: DirectiveView,
    cert: BoshernitzanCertificate,
    text: Word,
}

/// First 10⁶ letters of the first level word `w_n(1)` at least that long.
fn million_letters(dv: &DirectiveView) -> Result<Word, String> {
    let lw = core(first_level_reaching(dv, letter(1), 1_000_000, 100_000_000))?;
    Ok(core(lw.word(letter(1)))?.prefix(1_000_000))
}

fn random_certified(count: usize) -> Result<Vec<Certified>, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut out = Vec::new();
    let mut draws = 0;
    while out.len() < count {
        draws += 1;
        if draws > 50 * count {
            return Err(format!("only {} of {} random sequences certified", out.len(), count));
        }
        let (_, dv) = random_float_orbit(&mut rng, 200)?;
        if let Some(cert) = core(scan_certificate(&dv, None, 60, WindowCaps::default()))? {
            let text = million_letters(&dv)?;
            out.push(Certified { label: format!("random #{}", draws), dv, cert, text });
        }
    }
    Ok(out)
}

fn complexity(seqs: &[Certified]) -> Outcome {
    let mut excess = Vec::new();
    for s in seqs {
        let p = core(complexity_profile(&s.text, 40))?;
        for (k, &pn) in p.iter().enumerate() {
            let n = k + 1;
            ensure(pn <= 3 * n, || format!("{}: p({}) = {} > {}", s.label, n, pn, 3 * n))?;
        }
        excess.push(p.iter().enumerate().map(|(k, &pn)| pn as i64 - (2 * (k as i64 + 1) + 1)).max().unwrap());
    }
    Ok(format!("p(n) ≤ 3n for n ≤ 40 on {} sequences; max p(n) − (2n+1) per sequence {:?}", seqs.len(), excess))
}

fn empirical_bound(seqs: &[Certified]) -> Outcome {
    let mut lines = Vec::new();
    for s in seqs {
        let r = s.cert.r.to_usize().ok_or("r too large")?;
        let c = s.cert.constant().to_f64().unwrap();
        let tower = core(level_word_tower(&s.dv, s.cert.n2, usize::MAX))?;
        let sources: Vec<&Word> = (1..=3).map(|a| tower[s.cert.n2].word(letter(a)).unwrap()).collect();
        let (freq, w) = core(min_cylinder_frequency(&sources, &s.text, r))?;
        let bound = 0.8 * c / r as f64;
        ensure(freq >= bound, || format!("{}: word {} has frequency {:.3e} < {:.3e}", s.label, w, freq, bound))?;
        lines.push(format!("r={} min={:.2e}≥{:.2e}", r, freq, bound));
    }
    Ok(lines.join("; "))
}

fn spectrum_exactness() -> Outcome {
    let free = core(periodic_spectrum(&sadic_core::coding::Potential::new(vec![0.0])))?;
    ensure(free.bands == [(-2.0, 2.0)] && (total_bandwidth(&free) - 4.0).abs() < 1e-8, || format!("{:?}", free))?;
    let two = core(periodic_spectrum(&sadic_core::coding::Potential::new(vec![1.0, -1.0])))?;
    let s5 = 5f64.sqrt();
    let want = [(-s5, -1.0), (1.0, s5)];
    ensure(
        two.bands.len() == 2
            && two.bands.iter().zip(&want).all(|(a, b)| (a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8)
            && (total_bandwidth(&two) - 2.0 * (s5 - 1.0)).abs() < 1e-8,
        || format!("{:?}", two),
    )?;
    Ok(format!("measures {} and {:.10}", total_bandwidth(&free), total_bandwidth(&two)))
}

fn zero_measure_trend_check() -> Outcome {
    let dv = tau_star_view(60);
    let a = letter(1);
    let levels = core(growth_levels(&dv, a, 59, 4000))?;
    let mut parts = Vec::new();
    for coupling in [0.5, 1.0, 3.0] {
        let f = core(SamplingFunction::letter_values(&[0.0, 1.0, -1.0], coupling))?;
        let r = core(zero_measure_trend(&dv, &f, &levels, a, 4000))?;
        let bw = r.bandwidths();
        ensure(r.rows.len() >= 5, || format!("only {} levels", r.rows.len()))?;
        ensure(r.strictly_decreasing(), || format!("λ = {}: not strictly decreasing: {:?}", coupling, bw))?;
        let (first, last) = (bw[0], *bw.last().unwrap());
        ensure(last < 0.5 * first, || format!("λ = {}: final {} vs initial {}", coupling, last, first))?;
        parts.push(format!("λ={}: {:.3}→{:.2e}", coupling, first, last));
    }
    let periods: Vec<usize> = {
        let tower = core(level_word_tower(&dv, *levels.last().unwrap(), 4000))?;
        levels.iter().map(|&n| tower[n].word(a).unwrap().len()).collect()
    };
    Ok(format!("{} levels, periods {:?}; {}", levels.len(), periods, parts.join(", ")))
}

fn lyapunov() -> Outcome {
    let e = core(estimate_exponents(&CocycleRun::new(Algorithm::CassaigneSelmer, 1_000_000, 2024), 20))?;
    ensure(e.sum().abs() < 1e-2, || format!("θ sum {}", e.sum()))?;
    ensure(check_pisot(&e, 3.0), || format!("Pisot check fails: {:?}", e))?;
    let b1 = core(estimate_exponents(&CocycleRun::new(Algorithm::Brun, 1_000_000, 1), 20))?;
    let b2 = core(estimate_exponents(&CocycleRun::new(Algorithm::Brun, 1_000_000, 2), 20))?;
    let combined = (b1.stderr[1].powi(2) + b2.stderr[1].powi(2)).sqrt();
    let gap = (b1.theta[1] - b2.theta[1]).abs();
    ensure(gap <= 3.0 * combined, || format!("Brun θ₂ seeds differ by {:.2e} > 3·{:.2e}", gap, combined))?;
    Ok(format!(
        "CS θ = ({:.5}, {:.5}, {:.5}) ± ({:.1e}, {:.1e}, {:.1e}), Σ = {:.1e}; Brun θ₂ = {:.5} ± {:.1e} / {:.5} ± {:.1e}",
        e.theta[0],
        e.theta[1],
        e.theta[2],
        e.stderr[0],
        e.stderr[1],
        e.stderr[2],
        e.sum(),
        b1.theta[1],
        b1.stderr[1],
        b2.theta[1],
        b2.stderr[1]
    ))
}

fn cli_determinism() -> Outcome {
    let failures = common::check_goldens();
    ensure(failures.is_empty(), || failures.join(" | "))?;
    Ok(format!("{} invocations byte-identical at 1 worker, equal at 8", common::cases().len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, budget: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if took <= budget => (true, d),
            Ok(d) => (false, format!("over budget: {}", d)),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2} {} [{:.2}s / {}s] {}",
            if ok { "PASS" } else { "FAIL" },
            id,
            name,
            took.as_secs_f64(),
            budget.as_secs(),
            detail
        );
    };
    let s = Duration::from_secs;
    report(1, "exact word identity", s(1), &mut word_identity);
    report(2, "exact primitivity", s(1), &mut primitivity);
    report(3, "exact precedes sets", s(1), &mut precedes_sets);
    report(4, "certificate pipeline", s(30), &mut certificate_pipeline);
    report(5, "itinerary/cell duality", s(60), &mut itinerary_duality);
    report(6, "abelianization", s(30), &mut abelianization);
    report(7, "frequency convergence", s(120), &mut frequencies);

    let mut certified: Vec<Certified> = Vec::new();
    let mut build_error = None;
    let start = Instant::now();
    match random_certified(5) {
        Ok(v) => certified = v,
        Err(e) => build_error = Some(e),
    }
    let setup = start.elapsed();
    report(8, "complexity linearity", s(120).saturating_sub(setup), &mut || match &build_error {
        Some(e) => Err(e.clone()),
        None => complexity(&certified),
    });
    report(9, "empirical Boshernitzan bound", s(120), &mut || {
        if let Some(e) = &build_error {
            return Err(e.clone());
        }
        let dv = tau_star_view(60);
        let cert = core(scan_certificate(&dv, None, 60, WindowCaps::default()))?.ok_or("τ* not certified")?;
        let text = million_letters(&dv)?;
        let mut all = vec![Certified { label: "τ*".into(), dv, cert, text }];
        all.append(&mut certified);
        let out = empirical_bound(&all);
        certified = all.split_off(1);
        out
    });
    report(10, "spectrum exactness", s(1), &mut spectrum_exactness);
    report(11, "zero-measure trend", s(300), &mut zero_measure_trend_check);
    report(12, "Lyapunov conservation and Pisot check", s(600), &mut lyapunov);
    report(13, "CLI determinism", s(120), &mut cli_determinism);

    println!("{} of 13 criteria passed", 13 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
