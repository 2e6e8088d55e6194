//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Tolerances are fixed here and must not be widened.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use advisory_miner::classifiers::{
    c45_fit, gain_ratio, info_gain, knn_fit, nb_fit, Classifier, LearnerSpec, TreeParams,
};
use advisory_miner::data::{AttributeSpec, Dataset, Role, Value};
use advisory_miner::evaluation::{cross_validate, cross_validate_with, f_measure, per_class_prf, stratified_k_fold, ConfusionMatrix, CvConfig};
use advisory_miner::inferential::{anova_from_ss, one_way_anova, t_test_equal_var, t_test_from_samples, GroupSummary};
use advisory_miner::rng::Lcg;
use advisory_miner::special::{f_cdf, f_inv, t_cdf, t_inv};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Mean wall time of `f` over `reps` calls.
fn mean_time<T>(reps: u32, mut f: impl FnMut() -> T) -> Duration {
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(f());
    }
    start.elapsed() / reps
}

// ---------- 1: t-test vector ----------

fn t_test_vector() -> Outcome {
    let g1 = GroupSummary::new(17, 19.05882353, 107.8088235).map_err(|e| e.to_string())?;
    let g2 = GroupSummary::new(17, 26.17647059, 210.7794118).map_err(|e| e.to_string())?;
    let r = t_test_equal_var(g1, g2, 0.0, 0.05).map_err(|e| e.to_string())?;
    let cells = [
        ("pooled variance", r.pooled_variance, 159.2941176),
        ("t", r.t_stat, -1.644167436),
        ("p one-tail", r.p_one_tail.value(), 0.054966019),
        ("p two-tail", r.p_two_tail.value(), 0.109932039),
        ("t crit one-tail", r.t_crit_one_tail, 1.693888703),
        ("t crit two-tail", r.t_crit_two_tail, 2.036933334),
    ];
    for (name, got, want) in cells {
        check((got - want).abs() <= 1e-6, || format!("{name}: {got} vs {want}"))?;
    }
    check(r.df == 32, || format!("df {}", r.df))?;
    let t = mean_time(100, || t_test_equal_var(g1, g2, 0.0, 0.05));
    check(t < Duration::from_millis(1), || format!("runtime {t:?}"))?;
    Ok(format!("all cells within 1e-6, {t:?} per call"))
}

// ---------- 2: ANOVA vector ----------

fn anova_vector() -> Outcome {
    let a = anova_from_ss(730.6691, 7694.921, 2, 39, 0.05).map_err(|e| e.to_string())?;
    let rel = |got: f64, want: f64| ((got - want) / want).abs();
    check(rel(a.ms_within, 207.9708) <= 1e-4, || format!("MS within {}", a.ms_within))?;
    check(rel(a.f, 3.513325) <= 1e-4, || format!("F {}", a.f))?;
    check((a.p_value.value() - 0.068789).abs() <= 1e-4, || format!("p {}", a.p_value))?;
    check((a.f_crit - 4.105456).abs() <= 1e-4, || format!("F crit {}", a.f_crit))?;
    check((a.df_between, a.df_within) == (1, 37), || format!("df {} / {}", a.df_between, a.df_within))?;
    let t = mean_time(100, || anova_from_ss(730.6691, 7694.921, 2, 39, 0.05));
    check(t < Duration::from_millis(1), || format!("runtime {t:?}"))?;
    Ok(format!("MS, F, p and F crit within tolerance, {t:?} per call"))
}

// ---------- 3: F-measure vectors ----------

const PRF_CELLS: [(f64, f64, f64); 9] = [
    (0.903, 0.956, 0.929),
    (0.583, 0.4, 0.475),
    (1.0, 0.9, 0.947),
    (0.889, 0.985, 0.935),
    (0.714, 0.286, 0.408),
    (0.889, 0.8, 0.842),
    (0.897, 0.941, 0.919),
    (0.52, 0.371, 0.433),
    (1.0, 1.0, 1.0),
];

fn f_measure_vectors() -> Outcome {
    // per_class_prf combines precision and recall through f_measure
    let cm = ConfusionMatrix::from_counts(vec!["a".into(), "b".into()], vec![vec![9, 1], vec![0, 5]])
        .map_err(|e| e.to_string())?;
    let prf = per_class_prf(&cm).map_err(|e| e.to_string())?;
    for c in &prf.per_class {
        check(c.f_measure == f_measure(c.precision, c.recall), || format!("class {} disagrees with f_measure", c.label))?;
    }
    let misses: Vec<String> = PRF_CELLS
        .iter()
        .filter_map(|&(p, r, want)| {
            let got = f_measure(p, r);
            ((got - want).abs() > 5e-4).then(|| format!("({p}, {r}) -> {got:.6} vs {want} (|d| {:.2e})", (got - want).abs()))
        })
        .collect();
    if misses.is_empty() {
        Ok("9/9 cells within 5e-4".into())
    } else {
        Err(format!("{}/9 cells within 5e-4; {}", 9 - misses.len(), misses.join("; ")))
    }
}

// ---------- 4: F = t^2 ----------

fn f_equals_t_squared() -> Outcome {
    let mut rng = Lcg::new(4);
    let mut worst_f = 0f64;
    let mut worst_p = 0f64;
    for case in 0..500 {
        let n1 = 2 + rng.below(30);
        let n2 = 2 + rng.below(30);
        let shift = rng.normal() * 2.0;
        let scale = 0.5 + rng.next_f64() * 5.0;
        let a: Vec<f64> = (0..n1).map(|_| rng.normal() * scale).collect();
        let b: Vec<f64> = (0..n2).map(|_| shift + rng.normal() * scale).collect();
        let anova = one_way_anova(&[&a[..], &b[..]], 0.05).map_err(|e| format!("case {case}: {e}"))?;
        let t = t_test_from_samples(&a, &b, 0.0, 0.05).map_err(|e| format!("case {case}: {e}"))?;
        let df = (anova.f - t.t_stat * t.t_stat).abs();
        let dp = (anova.p_value.value() - t.p_two_tail.value()).abs();
        check(df <= 1e-9, || format!("case {case}: F {} vs t^2 {}", anova.f, t.t_stat * t.t_stat))?;
        check(dp <= 1e-9, || format!("case {case}: p {} vs {}", anova.p_value, t.p_two_tail))?;
        worst_f = worst_f.max(df);
        worst_p = worst_p.max(dp);
    }
    Ok(format!("500 cases, max |F - t^2| {worst_f:.1e}, max |dp| {worst_p:.1e}"))
}

// ---------- 5: special functions ----------

const PROBS: [f64; 11] = [0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999];
const F_PARTNERS: [f64; 7] = [1.0, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0];

fn special_functions() -> Outcome {
    let start = Instant::now();
    let e = |e: advisory_miner::special::DomainError| e.to_string();
    let mut worst = 0f64;
    for df in 1..=100 {
        let df = f64::from(df);
        for p in PROBS {
            let back = t_cdf(t_inv(p, df).map_err(e)?, df).map_err(e)?.value();
            worst = worst.max((back - p).abs());
            check((back - p).abs() <= 1e-8, || format!("t df {df} p {p}: {back}"))?;
            for other in F_PARTNERS {
                for (d1, d2) in [(df, other), (other, df)] {
                    let back = f_cdf(f_inv(p, d1, d2).map_err(e)?, d1, d2).map_err(e)?.value();
                    worst = worst.max((back - p).abs());
                    check((back - p).abs() <= 1e-8, || format!("F({d1}, {d2}) p {p}: {back}"))?;
                }
            }
        }
    }

    let mut rng = Lcg::new(5);
    for i in 0..10_000 {
        let df = f64::from(1 + rng.below(100) as u32);
        let d2 = f64::from(1 + rng.below(100) as u32);
        let (x1, x2) = {
            let a = (rng.next_f64() - 0.5) * 40.0;
            let b = (rng.next_f64() - 0.5) * 40.0;
            (a.min(b), a.max(b))
        };
        let (p1, p2) = {
            let a = 1e-6 + rng.next_f64() * (1.0 - 2e-6);
            let b = 1e-6 + rng.next_f64() * (1.0 - 2e-6);
            (a.min(b), a.max(b))
        };
        let tc = (t_cdf(x1, df).map_err(e)?.value(), t_cdf(x2, df).map_err(e)?.value());
        let fc = (f_cdf(x1.abs().min(x2.abs()), df, d2).map_err(e)?.value(), f_cdf(x1.abs().max(x2.abs()), df, d2).map_err(e)?.value());
        let ti = (t_inv(p1, df).map_err(e)?, t_inv(p2, df).map_err(e)?);
        let fi = (f_inv(p1, df, d2).map_err(e)?, f_inv(p2, df, d2).map_err(e)?);
        check(tc.0 <= tc.1 && fc.0 <= fc.1 && ti.0 <= ti.1 && fi.0 <= fi.1, || {
            format!("point {i}: df {df}/{d2}, x {x1}..{x2}, p {p1}..{p2} not monotone")
        })?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("runtime {elapsed:?}"))?;
    Ok(format!("max round-trip error {worst:.1e}, 10^4 monotone points, {elapsed:.2?}"))
}

// ---------- 6: classifier oracles ----------

const WEATHER: [(usize, f64, f64, usize, usize); 14] = [
    (0, 85.0, 85.0, 0, 1),
    (0, 80.0, 90.0, 1, 1),
    (1, 83.0, 86.0, 0, 0),
    (2, 70.0, 96.0, 0, 0),
    (2, 68.0, 80.0, 0, 0),
    (2, 65.0, 70.0, 1, 1),
    (1, 64.0, 65.0, 1, 0),
    (0, 72.0, 95.0, 0, 1),
    (0, 69.0, 70.0, 0, 0),
    (2, 75.0, 80.0, 0, 0),
    (0, 75.0, 70.0, 1, 0),
    (1, 72.0, 90.0, 1, 0),
    (1, 81.0, 75.0, 0, 0),
    (2, 71.0, 91.0, 1, 1),
];

fn weather() -> Dataset {
    let schema = vec![
        AttributeSpec::nominal("outlook", ["sunny", "overcast", "rainy"], Role::Feature),
        AttributeSpec::numeric("temperature", Role::Feature),
        AttributeSpec::numeric("humidity", Role::Feature),
        AttributeSpec::nominal("windy", ["false", "true"], Role::Feature),
        AttributeSpec::nominal("play", ["yes", "no"], Role::Class),
    ];
    let rows = WEATHER
        .iter()
        .map(|&(o, t, h, w, p)| vec![Value::Cat(o), Value::Num(t), Value::Num(h), Value::Cat(w), Value::Cat(p)])
        .collect();
    Dataset::new(schema, rows).unwrap()
}

fn entropy(counts: &[f64]) -> f64 {
    let n: f64 = counts.iter().sum();
    counts.iter().filter(|&&c| c > 0.0).map(|&c| -(c / n) * (c / n).log2()).sum()
}

/// (gain, split info) of grouping the labels by `key`.
fn split_oracle(key: &[usize], labels: &[usize]) -> (f64, f64) {
    let groups = key.iter().max().unwrap() + 1;
    let mut table = vec![vec![0.0; 2]; groups];
    let mut all = vec![0.0; 2];
    for (&g, &c) in key.iter().zip(labels) {
        table[g][c] += 1.0;
        all[c] += 1.0;
    }
    let n = labels.len() as f64;
    let sizes: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let rest: f64 = table.iter().zip(&sizes).filter(|(_, &s)| s > 0.0).map(|(r, &s)| s / n * entropy(r)).sum();
    (entropy(&all) - rest, entropy(&sizes))
}

/// Best gain over midpoint thresholds, with the ratios of every threshold
/// reaching it.
fn numeric_oracle(xs: &[f64], labels: &[usize]) -> (f64, Vec<f64>) {
    let mut cuts = xs.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let all: Vec<(f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let t = (w[0] + w[1]) / 2.0;
            split_oracle(&xs.iter().map(|&x| usize::from(x > t)).collect::<Vec<_>>(), labels)
        })
        .collect();
    let best = all.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    (best, all.iter().filter(|s| (s.0 - best).abs() < 1e-12).map(|s| s.0 / s.1).collect())
}

fn gain_oracles() -> Result<(), String> {
    let ds = weather();
    let labels: Vec<usize> = WEATHER.iter().map(|r| r.4).collect();
    let nominal = |key: Vec<usize>| {
        let (g, s) = split_oracle(&key, &labels);
        (g, vec![g / s])
    };
    let oracle = [
        ("outlook", nominal(WEATHER.iter().map(|r| r.0).collect())),
        ("temperature", numeric_oracle(&WEATHER.iter().map(|r| r.1).collect::<Vec<_>>(), &labels)),
        ("humidity", numeric_oracle(&WEATHER.iter().map(|r| r.2).collect::<Vec<_>>(), &labels)),
        ("windy", nominal(WEATHER.iter().map(|r| r.3).collect())),
    ];
    for (name, (gain, ratios)) in oracle {
        let got = info_gain(&ds, name).map_err(|e| e.to_string())?;
        check((got - gain).abs() <= 1e-9, || format!("{name} gain {got} vs {gain}"))?;
        let ratio = gain_ratio(&ds, name).map_err(|e| e.to_string())?.ok_or(format!("{name}: no ratio"))?;
        check(ratios.iter().any(|r| (ratio - r).abs() <= 1e-9), || format!("{name} ratio {ratio} vs {ratios:?}"))?;
    }
    Ok(())
}

/// Add-one smoothed nominal likelihoods and Gaussian numeric ones,
/// multiplied out directly.
fn nb_oracles() -> Result<(), String> {
    let ds = weather();
    let model = nb_fit(&ds).map_err(|e| e.to_string())?;
    let by_class = |c: usize| WEATHER.iter().filter(move |r| r.4 == c);
    let gaussian = |c: usize, x: f64, get: fn(&(usize, f64, f64, usize, usize)) -> f64| {
        let v: Vec<f64> = by_class(c).map(get).collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (-(x - m).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
    };
    let nominal = |c: usize, value: usize, k: f64, get: fn(&(usize, f64, f64, usize, usize)) -> usize| {
        let n = by_class(c).count() as f64;
        (by_class(c).filter(|r| get(r) == value).count() as f64 + 1.0) / (n + k)
    };
    for q in WEATHER.iter().chain(&[(0, 66.0, 90.0, 1, 0), (2, 80.0, 60.0, 0, 0)]) {
        let joint: Vec<f64> = (0..2)
            .map(|c| {
                let prior = (by_class(c).count() as f64 + 1.0) / (WEATHER.len() as f64 + 2.0);
                prior
                    * nominal(c, q.0, 3.0, |r| r.0)
                    * gaussian(c, q.1, |r| r.1)
                    * gaussian(c, q.2, |r| r.2)
                    * nominal(c, q.3, 2.0, |r| r.3)
            })
            .collect();
        let want = joint[0] / (joint[0] + joint[1]);
        let x = [Value::Cat(q.0), Value::Num(q.1), Value::Num(q.2), Value::Cat(q.3), Value::Cat(0)];
        let got = model.predict_proba(&x).map_err(|e| e.to_string())?.probs()[0];
        check((got - want).abs() <= 1e-9, || format!("NB posterior {got} vs {want} for {q:?}"))?;
    }
    Ok(())
}

/// Min-max normalized Euclidean distance with 0/1 nominal mismatch, k
/// nearest by (distance, index), majority vote with inverse-distance and
/// class-order tie-breaks.
fn knn_oracle(k: usize, q: &[Value]) -> usize {
    let range = |get: fn(&(usize, f64, f64, usize, usize)) -> f64| {
        let v: Vec<f64> = WEATHER.iter().map(get).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi - lo)
    };
    let (t_lo, t_span) = range(|r| r.1);
    let (h_lo, h_span) = range(|r| r.2);
    let (qo, qt, qh, qw) = (q[0].as_cat().unwrap(), q[1].as_num().unwrap(), q[2].as_num().unwrap(), q[3].as_cat().unwrap());
    let mut d: Vec<(f64, usize)> = WEATHER
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let dt = (r.1 - t_lo) / t_span - (qt - t_lo) / t_span;
            let dh = (r.2 - h_lo) / h_span - (qh - h_lo) / h_span;
            let s = dt * dt + dh * dh + f64::from(u8::from(r.0 != qo)) + f64::from(u8::from(r.3 != qw));
            (s.sqrt(), i)
        })
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [0usize; 2];
    let mut inv = [0f64; 2];
    for &(dist, i) in &d[..k] {
        let c = WEATHER[i].4;
        votes[c] += 1;
        inv[c] += if dist == 0.0 { f64::INFINITY } else { 1.0 / dist };
    }
    (0..2)
        .max_by(|&a, &b| votes[a].cmp(&votes[b]).then(inv[a].total_cmp(&inv[b])).then(b.cmp(&a)))
        .unwrap()
}

fn knn_oracles() -> Result<(), String> {
    let ds = weather();
    let mut rng = Lcg::new(6);
    let mut queries: Vec<Vec<Value>> = ds.instances().to_vec();
    for _ in 0..200 {
        queries.push(vec![
            Value::Cat(rng.below(3)),
            Value::Num(60.0 + rng.below(30) as f64),
            Value::Num(60.0 + rng.below(40) as f64),
            Value::Cat(rng.below(2)),
            Value::Cat(0),
        ]);
    }
    for k in [1, 2, 3, 4, 5, 7] {
        let model = knn_fit(&ds, k).map_err(|e| e.to_string())?;
        for q in &queries {
            let got = model.predict(q).map_err(|e| e.to_string())?;
            check(got == knn_oracle(k, q), || format!("k {k}: query {q:?} predicted {got}"))?;
        }
    }

    // a query whose five nearest neighbours all share one class
    let model = knn_fit(&ds, 5).map_err(|e| e.to_string())?;
    let q = [Value::Cat(1), Value::Num(72.0), Value::Num(80.0), Value::Cat(0), Value::Cat(1)];
    let nearest = model.neighbors(&q).map_err(|e| e.to_string())?;
    let unanimous = nearest.iter().take(5).all(|&(i, _)| WEATHER[i].4 == 0);
    check(unanimous, || format!("neighbourhood not unanimous: {nearest:?}"))?;
    let p = model.predict_proba(&q).map_err(|e| e.to_string())?;
    check(p.probs() == [1.0, 0.0] && knn_oracle(5, &q) == 0, || format!("unanimous case gave {:?}", p.probs()))?;
    Ok(())
}

fn classifier_oracles() -> Outcome {
    gain_oracles()?;
    nb_oracles()?;
    knn_oracles()?;
    Ok("gain, gain ratio, NB posteriors and kNN votes match their oracles".into())
}

// ---------- 7: cross-validation ----------

fn random_dataset(rng: &mut Lcg, n: usize, classes: usize) -> Dataset {
    let labels: Vec<String> = (0..classes).map(|c| format!("c{c}")).collect();
    let schema = vec![
        AttributeSpec::numeric("x", Role::Feature),
        AttributeSpec::nominal("g", ["a", "b", "c"], Role::Feature),
        AttributeSpec::nominal("y", labels, Role::Class),
    ];
    let rows = (0..n)
        .map(|_| vec![Value::Num(rng.normal() * 10.0), Value::Cat(rng.below(3)), Value::Cat(rng.below(classes))])
        .collect();
    Dataset::new(schema, rows).unwrap()
}

fn cross_validation_properties() -> Outcome {
    let mut rng = Lcg::new(7);
    for case in 0..200 {
        let classes = 2 + rng.below(3);
        let n = 10 + rng.below(120);
        let ds = random_dataset(&mut rng, n, classes);
        let k = 2 + rng.below(n.min(12) - 1);
        let seed = rng.next_u32().into();
        let folds = stratified_k_fold(&ds, k, seed).map_err(|e| format!("case {case}: {e}"))?;
        check(folds.len() == k, || format!("case {case}: {} folds", folds.len()))?;
        let mut seen = vec![0u8; n];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        check(seen.iter().all(|&s| s == 1), || format!("case {case}: folds do not partition"))?;
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        check(spread <= 1, || format!("case {case}: fold sizes {sizes:?}"))?;
        for c in 0..classes {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| ds.class_of(i) == c).count()).collect();
            let spread = per.iter().max().unwrap() - per.iter().min().unwrap();
            check(spread <= 1, || format!("case {case}: class {c} per fold {per:?}"))?;
        }
        check(folds == stratified_k_fold(&ds, k, seed).unwrap(), || format!("case {case}: folds not reproducible"))?;
    }

    for case in 0..20 {
        let ds = random_dataset(&mut rng, 30 + 7 * case, 3);
        let r = cross_validate(&LearnerSpec::Prior, &ds, 10, case as u64).map_err(|e| e.to_string())?;
        let (rae, rrse) = (r.errors.rae_percent, r.errors.rrse_percent);
        check((rae - 100.0).abs() <= 1e-6 && (rrse - 100.0).abs() <= 1e-6, || {
            format!("prior baseline case {case}: RAE {rae}, RRSE {rrse}")
        })?;
    }

    let ds = random_dataset(&mut rng, 150, 3);
    for learner in [LearnerSpec::C45(TreeParams::default()), LearnerSpec::NaiveBayes, LearnerSpec::Knn { k: 5, normalize: true }] {
        let config = CvConfig::new(10, 99);
        let a = serde_json::to_string(&cross_validate_with(&learner, &ds, &config).map_err(|e| e.to_string())?).unwrap();
        let b = serde_json::to_string(&cross_validate_with(&learner, &ds, &config).map_err(|e| e.to_string())?).unwrap();
        let par = CvConfig { parallel: true, ..config };
        let c = serde_json::to_string(&cross_validate_with(&learner, &ds, &par).map_err(|e| e.to_string())?).unwrap();
        check(a == b && a == c, || format!("{} runs differ", learner.name()))?;
    }
    Ok("200 fold invariants, prior RAE = RRSE = 100%, byte-identical reruns".into())
}

// ---------- 8: end-to-end ----------

fn cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_advisory-miner"))
        .args(args)
        .env_remove("ADVISORY_MINER_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn end_to_end(dir: &Path) -> Outcome {
    let data = dir.join("cohort.csv");
    let data = data.to_str().unwrap();
    let start = Instant::now();
    cli(&["generate", "--seed", "42", "--out", data])?;
    let mut summary = Vec::new();
    for algo in ["c45", "nb", "knn"] {
        let json = cli(&["crossval", "--data", data, "--algo", algo, "--seed", "42", "--format", "json"])?;
        let reports: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
        let r = &reports[0];
        let acc = r["accuracy"].as_f64().ok_or("no accuracy")?;
        let kappa = r["kappa"].as_f64().ok_or("no kappa")?;
        check(acc >= 0.80 && kappa >= 0.5, || format!("{algo}: accuracy {acc:.4}, kappa {kappa:.4}"))?;
        summary.push(format!("{algo} {acc:.3}/{kappa:.3}"));
    }
    let rules = cli(&["rules", "--data", data])?;
    let top = rules.lines().next().ok_or("no rules")?;
    check(top.contains("Diff_G_R_C_H"), || format!("top rule ignores Diff_G_R_C_H: {top}"))?;
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("runtime {elapsed:?}"))?;
    Ok(format!("accuracy/kappa {}, top rule on Diff_G_R_C_H, {elapsed:.2?}", summary.join(", ")))
}

// ---------- 9: training fit and distributions ----------

fn training_fit_and_distributions() -> Outcome {
    let mut rng = Lcg::new(9);
    let unpruned = TreeParams { min_leaf: 1, prune: false, ..TreeParams::default() };
    let mut checked = 0usize;
    for case in 0..100 {
        let n = 5 + rng.below(80);
        let mut rows: Vec<Vec<Value>> = Vec::with_capacity(n);
        for _ in 0..n {
            let x = Value::Num(rng.below(40) as f64);
            let g = Value::Cat(rng.below(3));
            // same features always carry the same class
            let y = match rows.iter().find(|r| r[0] == x && r[1] == g) {
                Some(r) => r[2].clone(),
                None => Value::Cat(rng.below(3)),
            };
            rows.push(vec![x, g, y]);
        }
        let schema = vec![
            AttributeSpec::numeric("x", Role::Feature),
            AttributeSpec::nominal("g", ["a", "b", "c"], Role::Feature),
            AttributeSpec::nominal("y", ["c0", "c1", "c2"], Role::Class),
        ];
        let ds = Dataset::new(schema, rows).map_err(|e| e.to_string())?;
        let tree = c45_fit(&ds, &unpruned).map_err(|e| format!("case {case}: {e}"))?;
        let models: Vec<Box<dyn Classifier>> = vec![
            Box::new(tree.clone()),
            Box::new(c45_fit(&ds, &TreeParams::default()).map_err(|e| e.to_string())?),
            Box::new(nb_fit(&ds).map_err(|e| e.to_string())?),
            Box::new(knn_fit(&ds, 3.min(n)).map_err(|e| e.to_string())?),
        ];
        for (i, x) in ds.instances().iter().enumerate() {
            let predicted = tree.predict(x).map_err(|e| e.to_string())?;
            check(predicted == ds.class_of(i), || format!("case {case}: training instance {i} misclassified"))?;
            for m in &models {
                let sum: f64 = m.predict_proba(x).map_err(|e| e.to_string())?.probs().iter().sum();
                check((sum - 1.0).abs() <= 1e-9, || format!("case {case}: distribution sums to {sum}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("100 datasets fit exactly, {checked} distributions sum to 1"))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 9] = [
        ("t-test vector", Box::new(t_test_vector)),
        ("ANOVA vector", Box::new(anova_vector)),
        ("F-measure vectors", Box::new(f_measure_vectors)),
        ("F = t^2 duality", Box::new(f_equals_t_squared)),
        ("special functions", Box::new(special_functions)),
        ("classifier oracles", Box::new(classifier_oracles)),
        ("cross-validation properties", Box::new(cross_validation_properties)),
        ("end-to-end run", Box::new(|| end_to_end(dir.path()))),
        ("training fit and distributions", Box::new(training_fit_and_distributions)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {}. {name}: {reason}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
