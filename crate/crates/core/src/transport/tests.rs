use super::*;
use crate::hyperbolic::MobiusDisk;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

fn random_costs(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n * p).map(|_| rng.random::<f64>()).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Cheapest assignment with `m` matched rows, by enumeration.
fn brute_partial(cost: &[f64], n: usize, m: usize) -> f64 {
    let mut best = f64::INFINITY;
    for p in permutations(n) {
        // the first m entries of p pick rows, the matching is row p[k] -> column sigma
        let rows: Vec<usize> = p[..m].to_vec();
        for q in permutations(n) {
            let s: f64 = rows.iter().zip(&q[..m]).map(|(&i, &j)| cost[i * n + j]).sum();
            best = best.min(s);
        }
    }
    best / n as f64
}

fn on_lattice(plan: &TransportPlan, n: usize) -> bool {
    let unit = 1.0 / n as f64;
    plan.flows.iter().all(|&x| x.abs() <= 1e-9 || (x - unit).abs() <= 1e-9)
}

#[test]
fn two_by_two_diagonal() {
    let plan = transport_masses(&[0.5, 0.5], &[0.5, 0.5], &[0.0, 1.0, 1.0, 0.0]).unwrap();
    assert_eq!(plan.flows, vec![0.5, 0.0, 0.0, 0.5]);
    assert_eq!(plan.objective, 0.0);
}

#[test]
fn anti_diagonal_is_found() {
    let plan = transport_masses(&[0.5, 0.5], &[0.5, 0.5], &[1.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(plan.flows, vec![0.0, 0.5, 0.5, 0.0]);
}

#[test]
fn identical_measures_zero_diagonal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 7;
    let mut c = random_costs(n, n, &mut rng);
    for i in 0..n {
        c[i * n + i] = 0.0;
        for j in 0..n {
            if i != j {
                c[i * n + j] += 0.1;
            }
        }
    }
    let mu: Vec<f64> = (1..=n).map(|k| k as f64 / 28.0).collect();
    let plan = transport_masses(&mu, &mu, &c).unwrap();
    assert_eq!(plan.objective, 0.0);
    for i in 0..n {
        assert!((plan.get(i, i) - mu[i]).abs() < 1e-15);
    }
}

#[test]
fn permutation_optimality_against_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 2..=6 {
        for _ in 0..5 {
            let c = random_costs(n, n, &mut rng);
            let plan = transport_masses(&uniform(n), &uniform(n), &c).unwrap();
            assert!(on_lattice(&plan, n));
            let best = brute_partial(&c, n, n);
            assert!((plan.objective - best).abs() <= 1e-12, "{} vs {best}", plan.objective);
            assert_eq!(extract_permutation(&plan).unwrap().len(), n);
        }
    }
}

#[test]
fn partial_optimality_against_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 2..=5 {
        for m in 1..=n {
            let c = random_costs(n, n, &mut rng);
            let q = m as f64 / n as f64;
            let plan = partial_transport_masses(&uniform(n), &uniform(n), &c, q).unwrap();
            assert!(on_lattice(&plan, n));
            assert!(plan.row_residual <= 1e-9 && plan.col_residual <= 1e-9);
            assert!((plan.objective - brute_partial(&c, n, m)).abs() <= 1e-12);
            assert_eq!(extract_permutation(&plan).unwrap().len(), m);
        }
    }
}

#[test]
fn partial_three_by_three() {
    let c = [0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
    let plan = partial_transport_masses(&uniform(3), &uniform(3), &c, 2.0 / 3.0).unwrap();
    assert_eq!(plan.objective, 0.0);
    let matches = extract_permutation(&plan).unwrap();
    assert_eq!(matches.len(), 2);
    assert!(matches.iter().all(|&(i, j)| i == j));
}

#[test]
fn partial_full_fraction_matches_full() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mu = [0.1, 0.4, 0.2, 0.3];
    let nu = [0.25, 0.25, 0.3, 0.2];
    let c = random_costs(4, 4, &mut rng);
    let full = transport_masses(&mu, &nu, &c).unwrap();
    let part = partial_transport_masses(&mu, &nu, &c, 1.0).unwrap();
    assert!((full.objective - part.objective).abs() <= 1e-12);
}

#[test]
fn small_fraction_small_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c: Vec<f64> = random_costs(5, 5, &mut rng).iter().map(|x| x + 0.5).collect();
    let mut last = f64::INFINITY;
    for q in [0.5, 0.1, 0.01, 0.001] {
        let plan = partial_transport_masses(&uniform(5), &uniform(5), &c, q).unwrap();
        assert!(plan.objective < last && plan.objective <= 1.5 * q);
        last = plan.objective;
    }
}

#[test]
fn mass_fraction_range() {
    let c = [0.0; 4];
    for q in [0.0, -0.1, 1.5] {
        let err = partial_transport_masses(&[0.5, 0.5], &[0.5, 0.5], &c, q).unwrap_err();
        assert_eq!(err.name(), "QOutOfRange");
    }
}

#[test]
fn unequal_totals() {
    let err = transport_masses(&[0.5, 0.5], &[0.5, 0.6], &[0.0; 4]).unwrap_err();
    assert_eq!(err.name(), "InfeasibleMasses");
    let plan = transport_masses(&[0.5, 0.5], &[0.5, 0.5 + 1e-8], &[0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!(plan.col_residual <= 1e-12 && plan.row_residual <= 1e-12);
}

#[test]
fn permutation_extraction() {
    let n = 4;
    let sigma = [2, 0, 3, 1];
    let mut flows = vec![0.0; n * n];
    for (i, &j) in sigma.iter().enumerate() {
        flows[i * n + j] = 0.25;
    }
    let plan = TransportPlan {
        rows: n,
        cols: n,
        flows,
        objective: 0.0,
        row_residual: 0.0,
        col_residual: 0.0,
        mass_fraction: 1.0,
    };
    let m = extract_permutation(&plan).unwrap();
    assert_eq!(m, sigma.iter().enumerate().map(|(i, &j)| (i, j)).collect::<Vec<_>>());
    let mut frac = plan.clone();
    frac.flows[0] = 0.125;
    frac.flows[2] = 0.125;
    assert_eq!(extract_permutation(&frac).unwrap_err().name(), "NonVertexPlan");
}

#[test]
fn combine_and_normalize() {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 3.0, 0.0]);
    assert_eq!(combine_scales(&[a.clone(), DMatrix::from_element(2, 2, 1.0)]).unwrap(), a);
    let z = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
    assert_eq!(combine_scales(&[a.clone(), z]).unwrap()[(0, 1)], 0.0);
    assert_eq!(combine_scales(&[a.clone(), DMatrix::zeros(3, 3)]).unwrap_err().name(), "ShapeMismatch");
    let b = DMatrix::from_row_slice(3, 3, &[0.0, 2.0, 4.0, 2.0, 0.0, 3.0, 4.0, 3.0, 0.0]);
    let nb = normalize_dissimilarity(&b);
    assert_eq!((nb[(0, 1)], nb[(0, 2)], nb[(1, 2)], nb[(1, 1)]), (0.0, 1.0, 0.5, 0.0));
}

#[test]
fn single_sample_gets_all_mass() {
    let mesh = crate::synth::flat_disk(5).normalize_area().unwrap();
    let u = uniformize(&mesh, &UniformizeParams { tps_centers: 30, ..Default::default() }).unwrap();
    let s = sample_disk(&u, 1, 0).unwrap();
    let m = discretize_measure(&mesh, &u, &s).unwrap();
    assert_eq!(m.masses, vec![1.0]);
    let s = sample_disk(&u, 20, 0).unwrap();
    let m = discretize_measure(&mesh, &u, &s).unwrap();
    assert!((m.total() - 1.0).abs() <= 1e-12);
    assert!(m.points.iter().all(|z| z.norm() < 1.0));
}

#[test]
fn self_distance_is_zero() {
    let mesh = crate::synth::bumpy_disk(8, 2, 0.3, 4);
    let params = DistanceParams {
        samples: 12,
        rotations: 8,
        quad_h: 0.1,
        uniformize: UniformizeParams { tps_centers: 40, ..Default::default() },
        ..Default::default()
    };
    let r = distance(&mesh, &mesh, &params).unwrap();
    assert_eq!(r.value, 0.0);
    let d = dissimilarity_matrix(&[mesh.clone(), mesh], &params).unwrap();
    assert_eq!(d.raw[(0, 1)], 0.0);
}

/// Exact 1D transport cost with `|x - y|` between atomic measures: the
/// integral of the CDF difference.
fn cdf_cost(x: &[f64], a: &[f64], y: &[f64], b: &[f64]) -> f64 {
    let mut ev: Vec<(f64, f64)> = x.iter().zip(a).map(|(&p, &m)| (p, m)).collect();
    ev.extend(y.iter().zip(b).map(|(&p, &m)| (p, -m)));
    ev.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut f = 0.0;
    let mut cost = 0.0;
    for w in ev.windows(2) {
        f += w[0].1;
        cost += f.abs() * (w[1].0 - w[0].0);
    }
    cost
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn one_dimensional_oracle(
        x in prop::collection::vec(0.0f64..1.0, 1..8),
        y in prop::collection::vec(0.0f64..1.0, 1..8),
        wa in prop::collection::vec(0.05f64..1.0, 8),
        wb in prop::collection::vec(0.05f64..1.0, 8),
    ) {
        let sa: f64 = wa[..x.len()].iter().sum();
        let sb: f64 = wb[..y.len()].iter().sum();
        let a: Vec<f64> = wa[..x.len()].iter().map(|w| w / sa).collect();
        let mut b: Vec<f64> = wb[..y.len()].iter().map(|w| w / sb).collect();
        let fix = 1.0 - b.iter().sum::<f64>();
        b[0] += fix;
        let c: Vec<f64> = x.iter().flat_map(|&p| y.iter().map(move |&q| (p - q).abs())).collect();
        let plan = transport_masses(&a, &b, &c).unwrap();
        prop_assert!(plan.row_residual <= 1e-9 && plan.col_residual <= 1e-9);
        prop_assert!(plan.flows.iter().all(|&f| f >= 0.0));
        let exact = cdf_cost(&x, &a, &y, &b);
        prop_assert!((plan.objective - exact).abs() <= 1e-9, "{} vs {}", plan.objective, exact);
        let recomputed: f64 = plan.flows.iter().zip(&c).map(|(p, c)| p * c).sum();
        prop_assert!((recomputed - plan.objective).abs() <= 1e-10 * plan.objective.max(1e-300));
    }

    #[test]
    fn partial_marginals_hold(n in 2usize..7, p in 2usize..7, q in 0.05f64..1.0, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_costs(n, p, &mut rng);
        let plan = partial_transport_masses(&uniform(n), &uniform(p), &c, q).unwrap();
        prop_assert!(plan.row_residual <= 1e-9 && plan.col_residual <= 1e-9);
        prop_assert!((plan.total() - q).abs() <= 1e-9);
        prop_assert!(plan.flows.iter().all(|&f| f >= 0.0));
    }
}

#[test]
fn uniform_transport_gives_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let n = 5;
    let costs = CostMatrix {
        rows: n,
        cols: n,
        costs: random_costs(n, n, &mut rng),
        argmin: vec![0; n * n],
        rotations: 4,
        source_anchors: vec![MobiusDisk::identity(); n],
        target_anchors: vec![MobiusDisk::identity(); n],
    };
    let plan = uniform_transport(&costs, 1.0).unwrap();
    assert_eq!(extract_permutation(&plan).unwrap().len(), n);
    let partial = uniform_transport(&costs, 3.0 / n as f64).unwrap();
    assert_eq!(extract_permutation(&partial).unwrap().len(), 3);
    let wide = CostMatrix { cols: 4, costs: vec![0.0; 20], ..costs };
    assert!(matches!(uniform_transport(&wide, 1.0), Err(Error::ShapeMismatch(_))));
}
