use rand_distr::{Distribution as _, Normal};
use rrms::blocks::{CustomBlock, CustomInitial, Num};
use rrms::couplings::theoretical_limits;
use rrms::rng::substream;
use rrms::stats::{
    clt_report, gap_report, ks_critical_value, ks_statistic, lln_report, monte_carlo, McRunSpec,
    McSamples, Sampler, SummaryStats,
};
use rrms::{Distribution, FamilySpec};

fn rrt() -> FamilySpec {
    FamilySpec::K2 {
        alpha: 0.0,
        fitness: Distribution::Const { value: 1.0 },
        initial_fitness: None,
    }
}

#[test]
fn rrt_depth_at_two_has_mean_one_half() {
    let samples = monte_carlo(&McRunSpec::new(rrt(), 2, 1_000_000, 17, Sampler::Direct))
        .unwrap()
        .depths();
    let s = SummaryStats::from_samples(&samples);
    assert!((s.mean - 0.5).abs() < 3.0 * s.std_err, "{}", s.mean);
    assert!(s.variance >= 0.0);
    assert!((s.std_err - (s.variance / s.count as f64).sqrt()).abs() < 1e-15);
}

#[test]
fn zero_depth_family_gives_zeros_for_every_sampler() {
    let zero = FamilySpec::CustomDiscrete {
        blocks: vec![CustomBlock {
            weight: Num::Float(2.0),
            pmf: vec![(Num::Float(0.0), Num::Float(1.0))],
            prob: 1.0,
        }],
        initial: CustomInitial {
            weight: Num::Float(1.0),
            pmf: vec![(Num::Float(0.0), Num::Float(1.0))],
        },
    };
    for sampler in [
        Sampler::Direct,
        Sampler::Bucket,
        Sampler::Independent,
        Sampler::Coupled,
    ] {
        let out = monte_carlo(&McRunSpec::new(zero.clone(), 300, 50, 1, sampler)).unwrap();
        assert_eq!(out.len(), 50);
        match out {
            McSamples::Depths(d) => assert!(d.iter().all(|&x| x == 0.0)),
            McSamples::Pairs(p) => assert!(p.iter().all(|&(y, x)| y == 0.0 && x == 0.0)),
        }
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let spec = FamilySpec::GeometricPath { p: 0.4 };
    for sampler in [
        Sampler::Direct,
        Sampler::Bucket,
        Sampler::Independent,
        Sampler::Coupled,
    ] {
        let run = |workers| {
            monte_carlo(&McRunSpec::new(spec.clone(), 2000, 64, 99, sampler).with_workers(workers))
                .unwrap()
        };
        assert_eq!(run(1), run(8), "{sampler}");
    }
    let a = monte_carlo(&McRunSpec::new(spec.clone(), 2000, 64, 99, Sampler::Direct)).unwrap();
    let b = monte_carlo(&McRunSpec::new(spec, 2000, 64, 100, Sampler::Direct)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn monte_carlo_rejects_bad_specs() {
    assert!(monte_carlo(&McRunSpec::new(rrt(), 0, 10, 1, Sampler::Direct)).is_err());
    assert!(monte_carlo(&McRunSpec::new(rrt(), 10, 0, 1, Sampler::Direct)).is_err());
    assert!(monte_carlo(&McRunSpec::new(
        FamilySpec::GeometricPath { p: 2.0 },
        10,
        10,
        1,
        Sampler::Direct
    ))
    .is_err());
}

#[test]
fn ks_self_test_holds_across_seeds() {
    let (mu, sigma2) = (2.0, 6.0);
    let n: u64 = 100_000;
    let ln_n = (n as f64).ln();
    let normal = Normal::new(mu * ln_n, (sigma2 * ln_n).sqrt()).unwrap();
    let reps = 10_000;
    let critical = 1.63 / (reps as f64).sqrt();
    let mut failures = 0;
    let mut p_values = Vec::new();
    for seed in 0..100u64 {
        let mut rng = substream(seed, 90, 0);
        let samples: Vec<f64> = (0..reps).map(|_| normal.sample(&mut rng)).collect();
        let report = clt_report(&samples, n, mu, sigma2).unwrap();
        assert!((0.0..=1.0).contains(&report.ks_statistic));
        if report.ks_statistic >= critical {
            failures += 1;
        }
        p_values.push(report.ks_p_value);
    }
    // At the 1% level the failure count is Binomial(100, 0.01); more than 4
    // has probability below 0.4%.
    assert!(
        failures <= 4,
        "{failures} of 100 seeds rejected at the 1% level"
    );
    let uniformity = ks_statistic(&p_values, |x| x.clamp(0.0, 1.0));
    assert!(
        uniformity < ks_critical_value(1e-3, 100.0),
        "p-values not uniform: {uniformity}"
    );
}

#[test]
fn constant_samples_fail_the_normal_check() {
    let report = clt_report(&vec![5.0; 1000], 1000, 1.0, 1.0).unwrap();
    assert!(report.ks_statistic > 0.4);
    assert!(!report.normal_at_1pct);
    assert!(clt_report(&vec![5.0; 1000], 1000, 1.0, 0.0).is_err());
    assert!(clt_report(&vec![5.0; 50], 1000, 1.0, 1.0).is_err());
}

#[test]
fn report_constants_from_family_moments() {
    let rrt = rrt().build().unwrap();
    assert_eq!(theoretical_limits(rrt.moments()).unwrap(), (1.0, 1.0));
    let geo = FamilySpec::GeometricPath { p: 0.5 }.build().unwrap();
    assert_eq!(theoretical_limits(geo.moments()).unwrap(), (2.0, 6.0));
    let seg = FamilySpec::UniformSegment {
        weight: Distribution::Exponential { lambda: 1.0 },
        initial_weight: None,
    }
    .build()
    .unwrap();
    assert_eq!(theoretical_limits(seg.moments()).unwrap().0, 1.0);
}

#[test]
fn lln_report_edge_cases() {
    let zeros = lln_report(&[0.0; 10], 100, 2.0).unwrap();
    assert_eq!(zeros.mu_hat, 0.0);
    assert_eq!(zeros.rel_err, 1.0);
    assert!(lln_report(&[1.0], 1, 1.0).is_err());
}

#[test]
fn gap_report_edge_cases() {
    let rrt_pairs = |n| {
        let McSamples::Pairs(p) =
            monte_carlo(&McRunSpec::new(rrt(), n, 500, 4, Sampler::Coupled)).unwrap()
        else {
            panic!("pairs expected")
        };
        (n, p)
    };
    let table: Vec<_> = [100u64, 1000].into_iter().map(rrt_pairs).collect();
    let report = gap_report(&table, 0.5).unwrap();
    assert!(report.rows.iter().all(|r| r.exceedances == 0));
    assert!(report.nonincreasing);

    let geo = |n| {
        let spec = McRunSpec::new(
            FamilySpec::GeometricPath { p: 0.5 },
            n,
            500,
            4,
            Sampler::Coupled,
        );
        let McSamples::Pairs(p) = monte_carlo(&spec).unwrap() else {
            panic!("pairs expected")
        };
        (n, p)
    };
    let table: Vec<_> = [100u64, 1000].into_iter().map(geo).collect();
    assert!(gap_report(&table, 1e6)
        .unwrap()
        .rows
        .iter()
        .all(|r| r.prob == 0.0));
    assert!(gap_report(&table, 0.0).is_err());
    let short: Vec<_> = table.iter().map(|(n, p)| (*n, p[..100].to_vec())).collect();
    assert!(gap_report(&short, 0.5).is_err());
    let unsorted = vec![table[1].clone(), table[0].clone()];
    assert!(gap_report(&unsorted, 0.5).is_err());
}
