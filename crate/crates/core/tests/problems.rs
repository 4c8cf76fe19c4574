use std::collections::BTreeMap;
use std::fs;
use std::io::BufReader;
use std::path::PathBuf;

use ipas::problems::{generate_constraints, load_libsvm, parse_libsvm, write_libsvm, LogisticDataset, NoisyQuadratic};
use ipas::{BudgetMeter, ComponentFunction, ConstraintSet, SampleIndexSet, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ten_samples.libsvm")
}

type SparseRow = (f64, BTreeMap<usize, f64>);

/// Reads `label idx:val ...` lines without going through the library parser.
fn sparse_rows(text: &str, map_label: impl Fn(f64) -> f64) -> Vec<SparseRow> {
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut tok = l.split_whitespace();
            let label = map_label(tok.next().unwrap().parse().unwrap());
            let entries = tok
                .map(|t| {
                    let (i, v) = t.split_once(':').unwrap();
                    (i.parse().unwrap(), v.parse().unwrap())
                })
                .filter(|(_, v): &(usize, f64)| *v != 0.0)
                .collect();
            (label, entries)
        })
        .collect()
}

#[test]
fn fixture_loads_with_zero_one_labels() {
    let ds = load_libsvm(fixture()).unwrap();
    assert_eq!(ds.samples(), 10);
    assert_eq!(ds.features(), 5);
    assert_eq!(ds.labels()[..2], [1.0, -1.0]);
    assert_eq!(ds.attributes()[(0, 2)], 2.0);
    assert_eq!(ds.attributes()[(0, 1)], 0.0);
}

#[test]
fn fixture_round_trips_through_writer() {
    let original = fs::read_to_string(fixture()).unwrap();
    let expected = sparse_rows(&original, |l| if l == 0.0 { -1.0 } else { 1.0 });

    let ds = load_libsvm(fixture()).unwrap();
    let mut buf = Vec::new();
    write_libsvm(&ds, &mut buf).unwrap();
    let written = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(sparse_rows(&written, |l| l), expected);

    let reread = parse_libsvm(BufReader::new(buf.as_slice())).unwrap();
    assert_eq!(reread, ds);
}

#[test]
fn one_two_labels_map_to_signs() {
    let ds = parse_libsvm("2 1:1\n1 2:1\n".as_bytes()).unwrap();
    assert_eq!(ds.labels(), &[1.0, -1.0]);
    assert!(parse_libsvm("1 1:1\n2 1:1\n3 1:1\n".as_bytes()).is_err());
}

fn relative_error(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-12)
}

fn central_difference(f: impl Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    Vector::from_fn(x.len(), |j, _| {
        let mut up = x.clone();
        let mut down = x.clone();
        up[j] += h;
        down[j] -= h;
        (f(&up) - f(&down)) / (2.0 * h)
    })
}

#[test]
fn subsample_gradient_matches_finite_differences() {
    let obj = LogisticDataset::synthetic(200, 6, 21).unwrap().into_objective();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..50 {
        let x = Vector::from_fn(6, |_, _| rng.random_range(-3.0..3.0));
        let sample = obj.draw_sample(rng.random_range(1..40), &mut rng).unwrap();
        let mut meter = BudgetMeter::disabled();
        let g = obj.subsample_grad(&sample, &x, &mut meter).unwrap();
        let fd = central_difference(|v| obj.subsample_value(&sample, v, &mut BudgetMeter::disabled()).unwrap(), &x, 1e-6);
        assert!(relative_error(&g, &fd) <= 1e-5, "{g} vs {fd}");
    }
}

#[test]
fn noisy_quadratic_components_match_finite_differences() {
    let nq = NoisyQuadratic::generate(7, 30, 3.0, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let x = Vector::from_fn(7, |_, _| rng.random_range(-2.0..2.0));
        for i in 0..nq.len() {
            let fd = central_difference(|v| nq.value(i, v), &x, 1e-5);
            assert!(relative_error(&nq.gradient(i, &x), &fd) <= 1e-5);
        }
    }
}

#[test]
fn weighted_overrides_agree_with_component_loop() {
    let nq = NoisyQuadratic::generate(5, 12, 1.0, 8);
    let weights: Vec<f64> = (1..=12).map(|i| i as f64 / 78.0).collect();
    let x = Vector::from_fn(5, |i, _| 0.3 * i as f64 - 0.5);
    let value: f64 = (0..12).map(|i| weights[i] * nq.value(i, &x)).sum();
    let grad = (0..12).fold(Vector::zeros(5), |acc, i| acc + nq.gradient(i, &x) * weights[i]);
    assert!((nq.weighted_value(&weights, &x) - value).abs() <= 1e-12 * value.abs().max(1.0));
    assert!(relative_error(&nq.weighted_gradient(&weights, &x), &grad) <= 1e-12);

    let s = SampleIndexSet::new(vec![3, 3, 7]).unwrap();
    let obj = nq.into_objective();
    let direct = (2.0 * obj.components().value(3, &x) + obj.components().value(7, &x)) / 3.0;
    let v = obj.subsample_value(&s, &x, &mut BudgetMeter::new()).unwrap();
    assert!((v - direct).abs() <= 1e-12 * direct.abs().max(1.0));
}

#[test]
fn constraint_files_round_trip() {
    let cs = generate_constraints(9, 4, 12).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("system.txt");
    cs.write_text(fs::File::create(&path).unwrap()).unwrap();
    let back = ConstraintSet::read_text(BufReader::new(fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back.a(), cs.a());
    assert_eq!(back.b(), cs.b());
}
