use essr_core::km::{
    build_ring_training, component_of, local_diffusion_fit, local_drift_fit, partition_bins, MomentKind, MomentOptions,
};
use essr_core::rng::substream;
use essr_core::sde::{BoxDomain, SnapshotDataset};
use proptest::prelude::*;
use rand::Rng;

fn uniform_points(dim: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, &[0xb1]);
    (0..dim * count).map(|_| rng.random_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ring_targets_scale_inversely_with_h(seed in any::<u64>(), h in 1e-4f64..1.0, rings in 1usize..8) {
        let z = uniform_points(2, 500, seed);
        let mut rng = substream(seed, &[2]);
        let x: Vec<f64> = z.iter().map(|v| v + rng.random_range(-8.0..8.0)).collect();
        let a = build_ring_training(&SnapshotDataset::new(2, h, z.clone(), x.clone()).unwrap(), 1.0, 1.5, rings).unwrap();
        let b = build_ring_training(&SnapshotDataset::new(2, h / 2.0, z, x).unwrap(), 1.0, 1.5, rings).unwrap();
        prop_assert_eq!(&a.counts, &b.counts);
        for (ta, tb) in a.targets.iter().zip(&b.targets) {
            prop_assert!((tb - 2.0 * ta).abs() <= 1e-12 * tb.abs());
        }
    }

    #[test]
    fn no_excursions_means_unit_p(seed in any::<u64>(), dim in 1usize..3) {
        let z = uniform_points(dim, 4000, seed);
        let mut rng = substream(seed, &[3]);
        let x: Vec<f64> = z.iter().map(|v| v + rng.random_range(-0.3..0.3) / dim as f64).collect();
        let data = SnapshotDataset::new(dim, 0.01, z, x).unwrap();
        let grid = partition_bins(&data, &BoxDomain::cube(dim, -1.0, 1.0).unwrap(), &vec![4; dim]).unwrap();
        let t = local_drift_fit(&data, &grid, &MomentOptions::new(1.0, dim)).unwrap();
        prop_assert!(!t.p.is_empty());
        prop_assert!(t.p.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn affine_drift_is_recovered_at_bin_centers(
        seed in any::<u64>(),
        a in prop::array::uniform4(-2.0f64..2.0),
        b in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let h = 1e-3;
        let z = uniform_points(2, 6000, seed);
        let mut x = z.clone();
        for (zi, xi) in z.chunks_exact(2).zip(x.chunks_exact_mut(2)) {
            xi[0] += h * (a[0] * zi[0] + a[1] * zi[1] + b[0]);
            xi[1] += h * (a[2] * zi[0] + a[3] * zi[1] + b[1]);
        }
        let data = SnapshotDataset::new(2, h, z, x).unwrap();
        let grid = partition_bins(&data, &BoxDomain::cube(2, -1.0, 1.0).unwrap(), &[5, 5]).unwrap();
        let t = local_drift_fit(&data, &grid, &MomentOptions::new(1.0, 2)).unwrap();
        prop_assert_eq!(t.bins.len(), 25);
        for k in 0..t.bins.len() {
            let c = t.inputs.point(k);
            let want = [a[0] * c[0] + a[1] * c[1] + b[0], a[2] * c[0] + a[3] * c[1] + b[1]];
            for o in 0..2 {
                let got = t.targets[o][k];
                let tol = 1e-10 * want[o].abs().max(1.0);
                prop_assert!((got - want[o]).abs() <= tol, "bin {} output {}: {} vs {}", k, o, got, want[o]);
            }
        }
    }
}

#[test]
fn diffusion_outputs_are_the_upper_triangle() {
    for dim in 1..5 {
        let pairs: Vec<(usize, usize)> = (0..dim * (dim + 1) / 2).map(|o| component_of(MomentKind::Diffusion, dim, o)).collect();
        let mut want = Vec::new();
        for i in 0..dim {
            for j in i..dim {
                want.push((i, j));
            }
        }
        assert_eq!(pairs, want);
    }
    let z = uniform_points(3, 3000, 1);
    let x: Vec<f64> = z.iter().enumerate().map(|(i, v)| v + 0.01 * ((i * 7919 % 13) as f64 - 6.0)).collect();
    let data = SnapshotDataset::new(3, 0.01, z, x).unwrap();
    let grid = partition_bins(&data, &BoxDomain::cube(3, -1.0, 1.0).unwrap(), &[2, 2, 2]).unwrap();
    let t = local_diffusion_fit(&data, &grid, &MomentOptions::new(1.0, 3), None).unwrap();
    assert_eq!(t.outputs(), 6);
    assert_eq!((0..6).map(|o| t.component(o)).collect::<Vec<_>>(), [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]);
}
