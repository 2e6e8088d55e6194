use advisory_miner::data::cohort::{DIFF, L_STATUS, TOTAL_REG};
use advisory_miner::data::{parse_cohort_records, write_cohort_csv, AdStatus, Gender, LearningStatus};
use advisory_miner::synthetic::{generate_cohort, generate_records, GeneratorParams, NormalSpec};

fn params(seed: u64) -> GeneratorParams {
    GeneratorParams { seed, ..Default::default() }
}

#[test]
fn composition_by_quota_on_every_seed() {
    for seed in 0..20 {
        let recs = generate_records(&params(seed)).unwrap();
        assert_eq!(recs.len(), 249);
        assert_eq!(recs.iter().filter(|r| r.gen == Gender::Female).count(), 115);
        assert_eq!(recs.iter().filter(|r| r.l_status == LearningStatus::ExpectedToGraduate).count(), 39);
    }
}

#[test]
fn same_seed_same_bytes() {
    let a = write_cohort_csv(&generate_records(&params(9)).unwrap());
    let b = write_cohort_csv(&generate_records(&params(9)).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, write_cohort_csv(&generate_records(&params(10)).unwrap()));
}

#[test]
fn records_pass_validation() {
    for seed in 0..10 {
        let recs = generate_records(&params(seed)).unwrap();
        for r in &recs {
            assert!(r.total_gain_ch <= r.total_reg_ch);
            assert!((0.0..=5.0).contains(&r.cum_gpa));
            assert_eq!((r.cum_gpa * 100.0).round() / 100.0, r.cum_gpa);
        }
        assert_eq!(parse_cohort_records(&write_cohort_csv(&recs)).unwrap(), recs);
    }
}

#[test]
fn planted_diff_signal_orders_group_means() {
    let mut p = GeneratorParams::default();
    p.diff.normal = NormalSpec::new(10.0, 6.0);
    p.diff.under_risk = NormalSpec::new(40.0, 6.0);
    for seed in 0..30 {
        p.seed = seed;
        let recs = generate_records(&p).unwrap();
        let mean = |class: AdStatus| {
            let v: Vec<f64> = recs.iter().filter(|r| r.ad_status == class).map(|r| f64::from(r.diff_g_r_ch)).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(AdStatus::UnderRisk) > mean(AdStatus::Normal), "seed {seed}");
    }
}

#[test]
fn female_count_tracks_fraction() {
    for (n, f) in [(10, 0.46), (100, 0.33), (7, 0.5), (249, 0.0), (249, 1.0)] {
        let recs = generate_records(&GeneratorParams { n, female_fraction: f, ..Default::default() }).unwrap();
        let female = recs.iter().filter(|r| r.gen == Gender::Female).count() as f64;
        assert!((female - (n as f64 * f).round()).abs() <= 1.0);
    }
}

#[test]
fn expected_registered_hours_match_configured_mean() {
    let spec = GeneratorParams::default().total_reg.expected_to_graduate;
    for seed in 0..100 {
        let ds = generate_cohort(&params(seed)).unwrap();
        let expected = ds.partition_by(L_STATUS).unwrap().swap_remove("ExpectedToGraduate").unwrap();
        let reg = expected.numeric_column(TOTAL_REG).unwrap();
        let mean = reg.iter().sum::<f64>() / reg.len() as f64;
        let se = spec.sd / (reg.len() as f64).sqrt();
        assert!((mean - spec.mean).abs() <= 3.0 * se, "seed {seed}: mean {mean}");
        assert!(expected.numeric_column(DIFF).unwrap().iter().all(|d| *d >= 0.0));
    }
}
