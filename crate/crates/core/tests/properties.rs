use proptest::prelude::*;
use spectral_basis::basis::{harmonic_basis, ScalarField};
use spectral_basis::filters::rational_partial_fractions;
use spectral_basis::mesh::shapes::grid_square;
use spectral_basis::mesh::DistanceMetric;
use spectral_basis::seeds::{coverage_curve, farthest_point_sampling};
use spectral_basis::{LaplacianOperator, MassMode, Scheme, TriangleMesh};

/// A grid with jittered heights, so the surface is curved and irregular.
fn wavy_grid(nx: usize, ny: usize, heights: &[f64]) -> TriangleMesh {
    let flat = grid_square(nx, ny, 1.0);
    let vertices = flat
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| [p[0], p[1], heights[i % heights.len()]])
        .collect();
    TriangleMesh::new(vertices, flat.triangles().to_vec()).unwrap()
}

fn mesh_strategy() -> impl Strategy<Value = TriangleMesh> {
    (3usize..9, 3usize..9, prop::collection::vec(-0.2f64..0.2, 1..40)).prop_map(|(nx, ny, h)| wavy_grid(nx, ny, &h))
}

fn mass_strategy() -> impl Strategy<Value = MassMode> {
    prop_oneof![Just(MassMode::Lumped), Just(MassMode::Consistent)]
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_invariants(mesh in mesh_strategy(), mass in mass_strategy(), f in prop::collection::vec(-1.0f64..1.0, 81)) {
        let op = LaplacianOperator::assemble(&mesh, Scheme::LinearFem, mass).unwrap();
        let n = op.dim();
        let f: Vec<f64> = (0..n).map(|i| f[i % f.len()]).collect();
        let l = op.stiffness().unwrap();
        let scale = l.norm_inf();
        let l1 = l.mul_vec(&vec![1.0; n]);
        prop_assert!(l1.iter().all(|v| v.abs() <= 1e-12 * scale));
        let ff: f64 = f.iter().map(|v| v * v).sum();
        prop_assert!(l.bilinear(&f, &f) >= -1e-10 * ff * scale);
        prop_assert!((op.total_mass() - mesh.surface_area()).abs() <= 1e-10);
    }

    #[test]
    fn harmonic_partition_of_unity(mesh in mesh_strategy(), picks in prop::collection::btree_set(0usize..9, 1..5)) {
        let op = LaplacianOperator::assemble(&mesh, Scheme::MeanValue, MassMode::Lumped).unwrap();
        let seeds: Vec<usize> = picks.into_iter().collect();
        let set = harmonic_basis(&mesh, &op, &seeds).unwrap();
        for i in 0..mesh.num_vertices() {
            let sum: f64 = set.fields.iter().map(|f| f.values()[i]).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-8);
        }
        for f in &set.fields {
            prop_assert!(f.min() >= -1e-8 && f.max() <= 1.0 + 1e-8);
        }
    }

    #[test]
    fn fps_picks_distinct_vertices(mesh in mesh_strategy(), k in 1usize..9, start in 0usize..9) {
        let s = farthest_point_sampling(&mesh, k, start, DistanceMetric::Euclidean).unwrap();
        prop_assert_eq!(s.indices()[0], start);
        let mut sorted = s.indices().to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), k);
    }

    #[test]
    fn coverage_curve_is_monotone(fields in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 20), 1..8), tau in 0.01f64..0.9) {
        let fields: Vec<ScalarField> = fields
            .into_iter()
            .filter(|v| v.iter().any(|x| *x != 0.0))
            .map(|v| ScalarField::new(v, "random").unwrap())
            .collect();
        prop_assume!(!fields.is_empty());
        let curve = coverage_curve(&fields, tau).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(curve.iter().all(|&c| c > 0.0 && c <= 1.0));
    }

    #[test]
    fn rational_forms_with_distinct_poles_are_exact(
        roots in prop::collection::btree_set(1u32..40, 1..4),
        pair in (0.5f64..3.0, 0.5f64..3.0),
        num in prop::collection::vec(-2.0f64..2.0, 1..3),
    ) {
        // den(s) = prod (1 + s / r_k) * ((s + a)^2 + b^2), all roots in the left half plane
        let mut den = vec![1.0];
        for r in &roots {
            den = poly_mul(&den, &[1.0, 1.0 / (*r as f64 * 0.25)]);
        }
        let (a, b) = pair;
        den = poly_mul(&den, &[a * a + b * b, 2.0 * a, 1.0]);
        let pf = rational_partial_fractions(&num, &den).unwrap();
        let horner = |c: &[f64], s: f64| c.iter().rev().fold(0.0, |acc, &x| acc * s + x);
        for i in 0..200 {
            let s = i as f64 * 0.25;
            let exact = horner(&num, s) / horner(&den, s);
            prop_assert!((pf.evaluate(s) - exact).abs() <= 1e-9 * exact.abs().max(1e-3));
        }
    }
}
