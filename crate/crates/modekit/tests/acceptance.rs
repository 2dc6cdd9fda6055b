//! End-to-end acceptance checks for the decomposition toolkit. Each test
//! covers one numbered release criterion and prints a single PASS line on
//! success (run with `--nocapture` to see them).

use modekit::decompose::{trend_extrema_count, EnsembleConfig};
use modekit::experiments::{
    default_corpus, gen_two_tone, gen_white_noise, rows_to_csv, run_sweep, NamedSignal, SweepSpec,
};
use modekit::metrics::{ecm, mean_period, mode_correlation};
use modekit::signal::{count_zero_crossings, find_extrema};
use modekit::{ceemdan, eemd, emd, Method, NoisePlan, Signal, StopCriterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

const CORPUS_SEED: u64 = 42;
const ENSEMBLE_SEED: u64 = 42;

fn pass(n: u32, what: &str) {
    println!("criterion {n:02} ({what}): PASS");
}

/// The four stop-criterion variants under test, in their standard
/// configurations (n=10, SD threshold 0.2, dual thresholds 0.05/0.5/0.05).
fn all_criteria() -> Vec<(&'static str, StopCriterion)> {
    vec![
        (
            "fixed_check",
            StopCriterion::fixed_with_imf_check(10).unwrap(),
        ),
        ("fixed", StopCriterion::fixed_exact(10).unwrap()),
        ("sd", StopCriterion::standard_deviation(0.2).unwrap()),
        ("dual", StopCriterion::dual_threshold_defaults()),
    ]
}

fn two_tone_5_40() -> Signal {
    gen_two_tone(5.0, 40.0, 400.0, 5.12, (1.0, 1.0)).unwrap()
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

fn completeness_error(signal: &Signal, rec: &[f64]) -> f64 {
    signal
        .samples()
        .iter()
        .zip(rec)
        .fold(0.0f64, |acc, (x, r)| acc.max((x - r).abs()))
}

#[test]
fn criterion_01_emd_completeness() {
    let start = Instant::now();
    let corpus = default_corpus(CORPUS_SEED);
    for (label, criterion) in all_criteria() {
        for ns in &corpus {
            let d = emd(&ns.signal, &criterion, None).unwrap();
            let err = completeness_error(&ns.signal, &d.reconstruction());
            let bound = 1e-9 * max_abs(ns.signal.samples());
            assert!(
                err <= bound,
                "{label}/{}: reconstruction error {err:.3e} > {bound:.3e}",
                ns.id
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.1}s, budget 10s");
    pass(1, "emd completeness");
}

#[test]
fn criterion_02_ceemdan_completeness() {
    let start = Instant::now();
    let corpus = default_corpus(CORPUS_SEED);
    for (i, ns) in corpus.iter().enumerate() {
        let config = EnsembleConfig {
            noise: NoisePlan::new(ENSEMBLE_SEED + i as u64, 100, 0.2).unwrap(),
            criterion: StopCriterion::dual_threshold_defaults(),
            max_modes: None,
        };
        let d = ceemdan(&ns.signal, &config).unwrap();
        let err = completeness_error(&ns.signal, &d.reconstruction());
        let bound = 1e-9 * max_abs(ns.signal.samples());
        assert!(
            err <= bound,
            "{}: reconstruction error {err:.3e} > {bound:.3e}",
            ns.id
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget 60s");
    pass(2, "ceemdan completeness");
}

#[test]
fn criterion_03_eemd_error_shrinks_with_ensemble_size() {
    let start = Instant::now();
    let signal = two_tone_5_40();
    let criterion = StopCriterion::dual_threshold_defaults()
        .with_max_iter(10)
        .unwrap();
    let mut prev = f64::INFINITY;
    for nr in [100u32, 500, 2000] {
        let config = EnsembleConfig {
            noise: NoisePlan::new(ENSEMBLE_SEED, nr, 0.02).unwrap(),
            criterion: criterion.clone(),
            max_modes: None,
        };
        let d = eemd(&signal, &config).unwrap();
        let e = ecm(&d, signal.samples()).unwrap();
        assert!(e < prev, "ecm {e:.3e} at nr={nr} is not below {prev:.3e}");
        prev = e;
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.1}s, budget 120s");
    pass(3, "eemd ecm strictly decreasing in NR");
}

#[test]
fn criterion_04_eemd_error_grows_with_noise_level() {
    let start = Instant::now();
    let signal = two_tone_5_40();
    let criterion = StopCriterion::dual_threshold_defaults()
        .with_max_iter(10)
        .unwrap();
    let mut prev = 0.0;
    for nstd in [0.05, 0.1, 0.5] {
        let config = EnsembleConfig {
            noise: NoisePlan::new(ENSEMBLE_SEED, 500, nstd).unwrap(),
            criterion: criterion.clone(),
            max_modes: None,
        };
        let d = eemd(&signal, &config).unwrap();
        let e = ecm(&d, signal.samples()).unwrap();
        assert!(
            e > prev,
            "ecm {e:.3e} at nstd={nstd} is not above {prev:.3e}"
        );
        prev = e;
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 90.0, "took {elapsed:.1}s, budget 90s");
    pass(4, "eemd ecm strictly increasing in Nstd");
}

#[test]
fn criterion_05_imf_condition_on_emitted_modes() {
    let corpus = default_corpus(CORPUS_SEED);
    for (label, criterion) in all_criteria() {
        // fixed-count sifting makes no promise about the result
        if label == "fixed" {
            continue;
        }
        for ns in &corpus {
            let d = emd(&ns.signal, &criterion, None).unwrap();
            for (k, imf) in d.imfs.iter().enumerate() {
                let extrema = find_extrema(imf).count();
                let crossings = count_zero_crossings(imf);
                assert!(
                    extrema.abs_diff(crossings) <= 1,
                    "{label}/{} mode {k}: {extrema} extrema vs {crossings} crossings",
                    ns.id
                );
            }
        }
    }
    pass(5, "zero-crossing/extrema counts differ by <= 1");
}

#[test]
fn criterion_06_fixed_count_runs_exactly_n() {
    let corpus = default_corpus(CORPUS_SEED);
    let criterion = StopCriterion::fixed_exact(10).unwrap();
    for ns in &corpus {
        let d = emd(&ns.signal, &criterion, None).unwrap();
        for (k, mode) in d.modes.iter().enumerate() {
            assert_eq!(
                mode.iterations, 10,
                "{} mode {k}: {} iterations",
                ns.id, mode.iterations
            );
        }
    }
    pass(6, "fixed-count sifting does exactly N=10 iterations");
}

#[test]
fn criterion_07_residue_has_at_most_one_extremum() {
    let corpus = default_corpus(CORPUS_SEED);
    for (label, criterion) in all_criteria() {
        for ns in &corpus {
            let d = emd(&ns.signal, &criterion, None).unwrap();
            let count = trend_extrema_count(&d.residue);
            assert!(count <= 1, "{label}/{}: residue has {count} extrema", ns.id);
        }
    }
    pass(7, "every residue is a trend");
}

#[test]
fn criterion_08_white_noise_acts_as_dyadic_filter() {
    let start = Instant::now();
    let noise = gen_white_noise(400.0, 10.24, 7).unwrap();
    assert_eq!(noise.len(), 4096);
    let d = emd(&noise, &StopCriterion::dual_threshold_defaults(), None).unwrap();
    assert!(d.imf_count() >= 6, "only {} modes", d.imf_count());
    let periods: Vec<f64> = d
        .imfs
        .iter()
        .map(|m| mean_period(m, 400.0).unwrap())
        .collect();
    // consecutive period ratios across modes 2..=6 should be near-dyadic
    for k in 1..5 {
        let ratio = periods[k + 1] / periods[k];
        assert!(
            (1.5..=3.0).contains(&ratio),
            "period ratio mode{}/mode{} = {ratio:.3}",
            k + 2,
            k + 1
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "took {elapsed:.1}s, budget 5s");
    pass(8, "mean periods roughly double across modes 2-6");
}

#[test]
fn criterion_09_ceemdan_separates_the_two_tones() {
    let start = Instant::now();
    let signal = two_tone_5_40();
    let config = EnsembleConfig {
        noise: NoisePlan::new(ENSEMBLE_SEED, 500, 0.2).unwrap(),
        criterion: StopCriterion::dual_threshold_defaults(),
        max_modes: None,
    };
    let d = ceemdan(&signal, &config).unwrap();
    let n = signal.len();
    for freq in [5.0, 40.0] {
        let tone: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / 400.0).sin())
            .collect();
        let best = d
            .imfs
            .iter()
            .filter_map(|imf| mode_correlation(imf, &tone, 0.8).ok())
            .fold(0.0f64, |acc, c| acc.max(c.abs()));
        assert!(best > 0.95, "{freq} Hz tone: best |correlation| {best:.4}");
        println!("  {freq} Hz tone recovered with |correlation| {best:.4} (NR=500)");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.1}s, budget 120s");
    pass(9, "recommended ceemdan config recovers both tones");
}

/// Drops the time column (index 8) from every CSV line.
fn strip_time_column(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            fields
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 8)
                .map(|(_, f)| *f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_10_sweeps_are_thread_count_invariant() {
    let signals: Vec<NamedSignal> = default_corpus(CORPUS_SEED).into_iter().take(3).collect();
    let spec = SweepSpec {
        method: Method::Eemd,
        criteria: vec![
            StopCriterion::fixed_exact(10).unwrap(),
            StopCriterion::dual_threshold_defaults(),
        ],
        nstd_grid: vec![0.02],
        nr_grid: vec![50],
        max_iter_grid: vec![10],
        signals,
        master_seed: 7,
    };
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| run_sweep(&spec).unwrap())
    };
    let csv1 = strip_time_column(&rows_to_csv(&run_with(1)));
    let csv8 = strip_time_column(&rows_to_csv(&run_with(8)));
    assert_eq!(csv1, csv8, "reports differ between 1 and 8 threads");
    pass(10, "sweep reports byte-identical at 1 and 8 threads");
}

#[test]
fn criterion_11_degenerate_inputs_yield_no_modes() {
    let start = Instant::now();
    let fs = 400.0;
    let ramp = Signal::new((0..256).map(|i| i as f64).collect(), fs).unwrap();
    let constant = Signal::new(vec![3.5; 256], fs).unwrap();
    for (name, s) in [("ramp", ramp), ("constant", constant)] {
        let d = emd(&s, &StopCriterion::dual_threshold_defaults(), None).unwrap();
        assert_eq!(d.imf_count(), 0, "{name}: expected no modes");
        let err = completeness_error(&s, &d.reconstruction());
        assert!(err == 0.0, "{name}: residue does not equal the input");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 0.1, "took {elapsed:.3}s, budget 0.1s");
    pass(11, "monotone and constant inputs give K=0");
}

/// Reference extrema scan: collapse the signal into runs of equal values;
/// an interior run strictly above (below) both neighbors is one maximum
/// (minimum) placed at the floor midpoint of the run. Boundary runs are
/// never extrema.
type Extrema = Vec<(usize, f64)>;

fn brute_force_extrema(x: &[f64]) -> (Extrema, Extrema) {
    let mut runs: Vec<(usize, usize, f64)> = Vec::new(); // (start, end inclusive, value)
    for (i, &v) in x.iter().enumerate() {
        match runs.last_mut() {
            Some((_, end, value)) if *value == v => *end = i,
            _ => runs.push((i, i, v)),
        }
    }
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for w in runs.windows(3) {
        let (prev, cur, next) = (w[0].2, w[1], w[2].2);
        let pos = (cur.0 + cur.1) / 2;
        if cur.2 > prev && cur.2 > next {
            maxima.push((pos, cur.2));
        } else if cur.2 < prev && cur.2 < next {
            minima.push((pos, cur.2));
        }
    }
    (maxima, minima)
}

/// Reference crossing count: drop exact zeros, count sign flips between
/// consecutive surviving samples.
fn brute_force_crossings(x: &[f64]) -> usize {
    let signs: Vec<bool> = x.iter().filter(|v| **v != 0.0).map(|v| *v > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

#[test]
fn criterion_12_scans_match_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let len = rng.random_range(0..=64);
        // small integer amplitudes make plateaus and exact zeros common
        let x: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random_bool(0.5) {
                    rng.random_range(-3..=3) as f64
                } else {
                    rng.random_range(-100..=100) as f64 / 10.0
                }
            })
            .collect();
        let found = find_extrema(&x);
        let (maxima, minima) = brute_force_extrema(&x);
        assert_eq!(found.maxima, maxima, "case {case}: maxima differ on {x:?}");
        assert_eq!(found.minima, minima, "case {case}: minima differ on {x:?}");
        assert_eq!(
            count_zero_crossings(&x),
            brute_force_crossings(&x),
            "case {case}: crossing counts differ on {x:?}"
        );
    }
    pass(
        12,
        "extrema and crossing scans match brute force on 100 cases",
    );
}
