use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shapeprog::dsl::{
    detokenize, parse_text, print_text, random_program, read_token_json, read_token_lines, tokenize, write_token_json,
    write_token_lines, RandomConfig,
};
use shapeprog::io::{export_obj, read_binvox, write_binvox};
use shapeprog::{Dims, VoxelGrid};

fn program(seed: u64) -> shapeprog::Program {
    random_program(&mut ChaCha8Rng::seed_from_u64(seed), &RandomConfig::default())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn tokens_roundtrip(seed in any::<u64>()) {
        let p = program(seed);
        let t = tokenize(&p).unwrap();
        prop_assert_eq!(&detokenize(&t).unwrap(), &p);
        prop_assert_eq!(&read_token_lines(&write_token_lines(&t)).unwrap(), &t);
        prop_assert_eq!(&read_token_json(&write_token_json(&t)).unwrap(), &t);
    }

    #[test]
    fn text_roundtrip(seed in any::<u64>()) {
        let p = program(seed);
        let text = print_text(&p);
        let back = parse_text(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(print_text(&back), text);
    }

    #[test]
    fn binvox_roundtrip(seed in any::<u64>(), x in 1usize..24, y in 1usize..24, z in 1usize..24, density in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = VoxelGrid::from_fn(Dims::new(x, y, z), |_, _, _| rng.gen_bool(density));
        let bytes = write_binvox(&g);
        prop_assert_eq!(&read_binvox(&bytes).unwrap(), &g);
        prop_assert_eq!(write_binvox(&g.clone()), bytes);
    }

    #[test]
    fn obj_export_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = VoxelGrid::from_fn(Dims::cube(6), |_, _, _| rng.gen_bool(0.3));
        prop_assert_eq!(export_obj(&g), export_obj(&g.clone()));
    }
}
