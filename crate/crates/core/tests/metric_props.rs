use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapeprog::metrics::{chamfer, emd, greedy_matching_cost, iou, weighted_bce, LossWeights, PointSet, BCE_EPS};
use shapeprog::{Dims, FloatGrid, VoxelGrid};

fn grid(rng: &mut ChaCha8Rng, dims: Dims) -> VoxelGrid {
    let density = rng.gen_range(0.0..0.6);
    VoxelGrid::from_fn(dims, |_, _, _| rng.gen_bool(density))
}

fn points(rng: &mut ChaCha8Rng, n: usize) -> PointSet {
    PointSet::new((0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn iou_is_a_similarity(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = Dims::cube(10);
        let (a, b) = (grid(&mut rng, dims), grid(&mut rng, dims));
        let v = iou(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a).unwrap());
        prop_assert_eq!(iou(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn distances_are_symmetric_and_vanish_on_equal_sets(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (points(&mut rng, n), points(&mut rng, n));
        let cd = chamfer(&a, &b).unwrap();
        prop_assert!(cd >= 0.0);
        prop_assert!((cd - chamfer(&b, &a).unwrap()).abs() <= 1e-12);
        let e = emd(&a, &b).unwrap();
        prop_assert!((e - emd(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!(e <= greedy_matching_cost(&a, &b).unwrap() + 1e-12);
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
        let mut shuffled = a.points().to_vec();
        shuffled.reverse();
        prop_assert!(emd(&a, &PointSet::new(shuffled).unwrap()).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn bce_is_minimized_at_the_target(seed in any::<u64>(), w0 in 0.1f64..5.0, w1 in 0.1f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = Dims::cube(6);
        let target = grid(&mut rng, dims);
        let w = LossWeights::new(w0, w1, 1.0, 1.0).unwrap();
        let best = FloatGrid::from_grid(&target, BCE_EPS, 1.0 - BCE_EPS);
        let floor = weighted_bce(&best, &target, &w).unwrap();
        let mut values = best.values().to_vec();
        let i = rng.gen_range(0..values.len());
        values[i] = rng.gen_range(0.0..1.0);
        let worse = weighted_bce(&FloatGrid::new(dims, values).unwrap(), &target, &w).unwrap();
        prop_assert!(worse >= floor);
    }
}
