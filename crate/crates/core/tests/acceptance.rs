//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::time::Instant;

use distlearn::comm::Party;
use distlearn::datagen::{generate, preset};
use distlearn::opt::{
    lp_width, multipass_lp_violate, mwu_lp_solve, run_monolithic, simplex_solve, stream_to_distributed, two_party_lp,
    Constraint, LinearProgram, MultipassConfig, MultipassLp, MultipassStatus, MwuLpConfig, StreamAdapterConfig,
};
use distlearn::protocols::{
    check_potential, mwu_words, naive_words, rand_sample_size, run_k_party, run_mwu, run_mwuemp, run_naive, run_rand,
    run_randemp, run_two_party, run_voting, MwuConfig,
};
use distlearn::sampling::rng_for;
use distlearn::types::{Label, LabeledPoint, WeightedDataset};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn guarantee_runs() -> Vec<(Vec<Party>, distlearn::protocols::ProtocolResult)> {
    (0..10)
        .map(|seed| {
            let data = generate(&preset("guarantee", seed).unwrap()).unwrap();
            let parties = Party::from_datasets(data.parties);
            let cfg = MwuConfig::guarantee(0.05, 5).with_seed(seed);
            let r = run_two_party(&parties[0], &parties[1], &cfg).unwrap();
            (parties, r)
        })
        .collect()
}

fn two_party_guarantee(runs: &[(Vec<Party>, distlearn::protocols::ProtocolResult)]) -> Outcome {
    let ok = runs.iter().filter(|(_, r)| 1.0 - r.train_accuracy <= 0.05).count();
    let rounds_ok = runs.iter().all(|(_, r)| r.rounds_used == 22);
    let worst = runs.iter().map(|(_, r)| 1.0 - r.train_accuracy).fold(0.0, f64::max);
    outcome(ok >= 9 && rounds_ok, format!("{ok}/10 trials with error ≤ 0.05 (worst {worst:.4}), 22 rounds each: {rounds_ok}"))
}

fn potential_invariant(runs: &[(Vec<Party>, distlearn::protocols::ProtocolResult)]) -> Outcome {
    let cfg = MwuConfig::guarantee(0.05, 5);
    let (mut checked, mut violations, mut bound_fail) = (0, 0, 0);
    for (_, r) in runs {
        let c = check_potential(r, cfg.rho, cfg.c);
        checked += c.checked_rounds;
        violations += c.growth_violations;
        bound_fail += usize::from(!c.majority_bound_holds);
    }
    outcome(
        violations == 0 && bound_fail == 0,
        format!("{checked} rounds checked, {violations} growth violations, {bound_fail} majority-bound failures"),
    )
}

fn blobs(seed: u64, k: usize, dim: usize, sizes: &[usize]) -> Vec<Party> {
    let mut rng = rng_for(seed, 5);
    let sets = (0..k)
        .map(|i| {
            let pts = (0..sizes[i])
                .map(|_| {
                    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let label = if x[0] + 0.3 * x[dim - 1] > 0.0 { Label::Positive } else { Label::Negative };
                    LabeledPoint::new(x, label)
                })
                .collect();
            WeightedDataset::from_points(dim, pts).unwrap()
        })
        .collect();
    Party::from_datasets(sets)
}

fn ledger_exactness() -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    for (k, dim) in [(2, 2), (2, 5), (3, 4), (4, 3), (4, 8)] {
        let sizes: Vec<usize> = (0..k).map(|i| 120 + 37 * i).collect();
        let parties = blobs((k * 10 + dim) as u64, k, dim, &sizes);
        let (kk, d) = (k as u64, dim as u64);
        let cfg = MwuConfig::new(0.05);
        let emp = MwuConfig { rounds_override: Some(4), ..MwuConfig::empirical(0.05) };
        let full = MwuConfig::empirical(0.05);
        let s = rand_sample_size(0.05, dim).unwrap() as u64;
        let checks = [
            ("naive", run_naive(&parties, &cfg).unwrap().ledger.total_words(), naive_words(&parties)),
            ("naive-sum", naive_words(&parties), sizes[1..].iter().map(|&n| (d + 1) * n as u64).sum()),
            ("voting", run_voting(&parties, &cfg).unwrap().ledger.total_words(), (d + 1) * (kk - 1)),
            ("randemp", run_randemp(&parties, &cfg).unwrap().ledger.total_words(), 9 * d * (d + 1) * (kk - 1)),
            ("mwu-4", run_mwu(&parties, &emp).unwrap().ledger.total_words(), ((d + 1) * 100 + (d + 1)) * (kk - 1) * 4),
            ("mwu-46", run_mwu(&parties, &full).unwrap().ledger.total_words(), mwu_words(k, dim, 100, 46)),
            ("rand", run_rand(&parties, &cfg).unwrap().ledger.total_words(), (kk - 1) * (d + 1) * s),
        ];
        let early = run_mwuemp(&parties, &full).unwrap();
        for (name, got, want) in checks.into_iter().chain([(
            "mwuemp",
            early.ledger.total_words(),
            ((d + 1) * 100 + (d + 1)) * (kk - 1) * early.rounds_used as u64,
        )]) {
            cases += 1;
            if got != want {
                failures.push(format!("{name} k={k} d={dim}: {got} != {want}"));
            }
        }
    }
    outcome(failures.is_empty(), format!("{cases} exact comparisons, mismatches: {failures:?}"))
}

fn k_party_reduction() -> Outcome {
    let mut same = 0;
    for seed in 0..3 {
        let data = generate(&preset("guarantee", 100 + seed).unwrap()).unwrap();
        let parties = Party::from_datasets(data.parties);
        let cfg = MwuConfig::guarantee(0.05, 5).with_seed(seed);
        let two = run_two_party(&parties[0], &parties[1], &cfg).unwrap();
        let k = run_k_party(&parties, &cfg).unwrap();
        same += usize::from(two == k && two.ledger == k.ledger && two.ensemble == k.ensemble);
    }
    outcome(same == 3, format!("{same}/3 seeds bit-identical"))
}

fn adversarial_voting() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let data = generate(&preset("adversarial", seed).unwrap()).unwrap();
        let parties = Party::from_datasets(data.parties);
        let cfg = MwuConfig::empirical(0.05).with_seed(seed);
        let voting = run_voting(&parties, &cfg).unwrap().train_accuracy;
        let mwuemp = run_mwuemp(&parties, &cfg).unwrap().train_accuracy;
        pass &= voting < 0.95 && mwuemp >= 0.95;
        lines.push(format!("voting {voting:.4} / mwuemp {mwuemp:.4}"));
    }
    outcome(pass, lines.join("; "))
}

fn random_lp(rng: &mut impl Rng, n: usize, d: usize) -> LinearProgram {
    let x0: Vec<f64> = (0..d).map(|_| rng.random_range(0.1..0.9)).collect();
    let constraints = (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = a.iter().zip(&x0).map(|(p, q)| p * q).sum::<f64>() - rng.random_range(0.0..0.3);
            Constraint::new(a, b)
        })
        .collect();
    let g = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    LinearProgram::in_box(constraints, g, 0.0, 1.0).unwrap()
}

fn soft_lp() -> Outcome {
    let mut rng = rng_for(6, 6);
    let mut ok = 0;
    let mut worst = f64::INFINITY;
    let cfg = MwuLpConfig::new(0.1);
    for _ in 0..20 {
        let n = rng.random_range(5..=50);
        let d = rng.random_range(2..=5);
        let lp = random_lp(&mut rng, n, d);
        let z = simplex_solve(&lp).unwrap().value;
        let s = mwu_lp_solve(&lp, z, &cfg).unwrap();
        let rho = lp_width(&lp, z).unwrap();
        let bound = (rho * rho * (n as f64).ln() / 0.01).ceil() * cfg.iteration_multiplier;
        let objective_ok = (lp.objective_value(&s.x_bar) - z).abs() <= 1e-9 * z.abs().max(1.0);
        worst = worst.min(s.min_slack);
        ok += usize::from(objective_ok && s.min_slack >= -0.1 && s.iterations as f64 <= bound);
    }
    outcome(ok == 20, format!("{ok}/20 instances soft-feasible at z*, worst min slack {worst:.4}"))
}

fn two_party_lp_ledger() -> Outcome {
    let mut rng = rng_for(7, 7);
    let mut ok = 0;
    for _ in 0..5 {
        let d = rng.random_range(2..=4);
        let lp = random_lp(&mut rng, 25, d);
        let z = simplex_solve(&lp).unwrap().value;
        let cfg = MwuLpConfig::new(0.2);
        let mono = mwu_lp_solve(&lp, z, &cfg).unwrap();
        let solver = LinearProgram { constraints: vec![], ..lp.clone() };
        let (dist, ledger) = two_party_lp(&solver, &lp.constraints, z, &cfg).unwrap();
        let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let exact = ledger.total_words() == (dist.iterations * (2 * d + 1)) as u64;
        ok += usize::from(exact && bits(&dist.x_bar) == bits(&mono.x_bar));
    }
    outcome(ok == 5, format!("{ok}/5 instances with ledger T(2d+1) and identical x̄"))
}

fn halfspaces(seed: u64, n: usize, d: usize) -> Vec<Constraint> {
    let mut rng = rng_for(seed, 8);
    let x0: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
    (0..n)
        .map(|_| {
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b = a.iter().zip(&x0).map(|(p, q)| p * q).sum::<f64>() - rng.random_range(0.0..0.5);
            Constraint::new(a, b)
        })
        .collect()
}

fn random_split<T: Clone>(items: &[T], k: usize, rng: &mut impl Rng) -> Vec<Vec<T>> {
    let mut cuts: Vec<usize> = (0..k - 1).map(|_| rng.random_range(0..=items.len())).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts.into_iter().chain([items.len()]) {
        parts.push(items[start..c].to_vec());
        start = c;
    }
    parts
}

fn stream_adapter() -> Outcome {
    let items = halfspaces(21, 300, 2);
    let mut cfg = MultipassConfig::new(2, 0.02, 3);
    cfg.sample_size = 30;
    let (s, r, k) = (cfg.store_words(), 5, 4);
    let mono = run_monolithic(MultipassLp::new(cfg.clone()).unwrap(), &items, r);
    let bits = |x: &Option<Vec<f64>>| x.as_ref().map(|v| v.iter().map(|f| f.to_bits()).collect::<Vec<_>>());
    let mut rng = rng_for(9, 9);
    let mut ok = 0;
    for _ in 0..5 {
        let parts = random_split(&items, k, &mut rng);
        let adapter = StreamAdapterConfig { store_words: s, passes: r, players: k };
        let run = stream_to_distributed(|| MultipassLp::new(cfg.clone()).unwrap(), &parts, &adapter).unwrap();
        let same = bits(&run.output.x) == bits(&mono.x) && run.output == mono;
        ok += usize::from(same && run.ledger.total_words() == (k * r * s) as u64);
    }
    outcome(ok == 5, format!("{ok}/5 partitions identical with ledger k·r·s = {}", k * r * s))
}

fn multipass_violations() -> Outcome {
    let mut ok = 0;
    let mut store_ok = true;
    let mut counts = Vec::new();
    for seed in 0..10 {
        let items = halfspaces(seed, 500, 2);
        let cfg = MultipassConfig::new(2, 0.05, seed);
        let brute = |x: &[f64]| items.iter().filter(|c| c.slack(x) < -1e-9 * (1.0 + c.rhs.abs())).count();
        let result = multipass_lp_violate(&items, &cfg, 12);
        let mut rng = rng_for(seed, 10);
        let adapter = StreamAdapterConfig { store_words: cfg.store_words(), passes: 12, players: 4 };
        let dist = stream_to_distributed(|| MultipassLp::new(cfg.clone()).unwrap(), &random_split(&items, 4, &mut rng), &adapter);
        store_ok &= dist.as_ref().is_ok_and(|d| d.peak_store_words <= cfg.store_words());
        match (result, dist) {
            (Ok(r), Ok(d)) if d.output.status == MultipassStatus::Done => {
                let v = brute(&r.x);
                counts.push(v);
                ok += usize::from(v <= 25 && r.peak_store_words <= cfg.store_words() && d.output.x.as_deref() == Some(&r.x[..]));
            }
            _ => counts.push(usize::MAX),
        }
    }
    outcome(ok >= 9 && store_ok, format!("{ok}/10 seeds ≤ 25 violations {counts:?}; store within budget: {store_ok}"))
}

/// Independent oracle: minimum over all feasible basic solutions.
fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let d = lp.dim();
    let mut rows: Vec<(Vec<f64>, f64)> = lp.constraints.iter().map(|c| (c.coeffs.clone(), c.rhs)).collect();
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = 1.0;
        rows.push((e.clone(), lp.lower[j]));
        rows.push((e.iter().map(|v| -v).collect(), -lp.upper[j]));
    }
    let feasible = |x: &[f64]| rows.iter().all(|(a, b)| a.iter().zip(x).map(|(p, q)| p * q).sum::<f64>() >= b - 1e-9);
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        if let Some(x) = gauss(&subset.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>(), d) {
            if feasible(&x) {
                let v = lp.objective_value(&x);
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < rows.len() - d + i {
                break;
            }
        }
        subset[i] += 1;
        for j in i + 1..d {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

fn gauss(rows: &[(Vec<f64>, f64)], d: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|(a, b)| a.iter().copied().chain([*b]).collect()).collect();
    for col in 0..d {
        let piv = (col..d).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..d {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..=d {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some((0..d).map(|i| m[i][d] / m[i][i]).collect())
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng_for(10, 10);
    let (mut agree, mut infeasible) = (0, 0);
    let mut mismatches = Vec::new();
    for t in 0..100 {
        let n = rng.random_range(1..=30);
        let d = rng.random_range(1..=4);
        let constraints = (0..n)
            .map(|_| {
                let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                Constraint::new(a, rng.random_range(-1.5..0.2))
            })
            .collect();
        let g = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let lp = LinearProgram::in_box(constraints, g, -1.0, 1.0).unwrap();
        let exact = simplex_solve(&lp);
        let oracle = vertex_enumeration(&lp);
        let same = match (&exact, oracle) {
            (Ok(s), Some(z)) => (s.value - z).abs() <= 1e-9 * z.abs().max(1.0),
            (Err(distlearn::Error::Infeasible), None) => {
                infeasible += 1;
                true
            }
            _ => false,
        };
        if same {
            agree += 1;
        } else {
            mismatches.push(t);
        }
    }
    outcome(agree == 100, format!("{agree}/100 agree ({infeasible} infeasible), mismatches {mismatches:?}"))
}

fn main() {
    let start = Instant::now();
    let runs = guarantee_runs();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("two-party ε-error guarantee", Box::new(|| two_party_guarantee(&runs))),
        ("potential-function invariant", Box::new(|| potential_invariant(&runs))),
        ("ledger exactness", Box::new(ledger_exactness)),
        ("k-party reduction", Box::new(k_party_reduction)),
        ("adversarial voting failure", Box::new(adversarial_voting)),
        ("soft-ε LP", Box::new(soft_lp)),
        ("two-party LP ledger", Box::new(two_party_lp_ledger)),
        ("stream adapter", Box::new(stream_adapter)),
        ("ε-violation multipass LP", Box::new(multipass_violations)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("{} of 10 criteria passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
