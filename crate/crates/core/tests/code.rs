use ldpc2d::code::{construct_regular_code, CosetLdpcCode, ParityCheckMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bits(n: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coset_words_have_the_coset_syndrome(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pcm = construct_regular_code(60, 3, 6, 6, seed).unwrap();
        let b = random_bits(60, &mut rng);
        let code = CosetLdpcCode::with_coset(pcm.clone(), b.clone()).unwrap();
        let u = random_bits(code.k(), &mut rng);
        let s = code.encode(&u).unwrap();
        prop_assert_eq!(pcm.syndrome(&s).unwrap(), code.syndrome().to_vec());
        prop_assert_eq!(pcm.syndrome(&b).unwrap(), code.syndrome().to_vec());
        prop_assert_eq!(code.extract_info(&s).unwrap(), u);
    }

    #[test]
    fn alist_round_trips(seed in any::<u64>(), n in prop::sample::select(vec![12usize, 24, 36])) {
        let pcm = construct_regular_code(n, 3, 6, 4, seed).unwrap();
        let text = pcm.to_alist_string();
        prop_assert_eq!(ParityCheckMatrix::from_alist_str(&text).unwrap(), pcm);
    }

    #[test]
    fn alist_parser_never_panics(text in "[0-9 \\n]{0,120}") {
        let _ = ParityCheckMatrix::from_alist_str(&text);
    }
}

#[test]
fn regular_construction_has_exact_degrees_and_no_four_cycles() {
    let pcm = construct_regular_code(2000, 3, 6, 6, 1).unwrap();
    assert_eq!(pcm.regular_degrees(), Some((3, 6)));
    assert!(!pcm.has_four_cycle());
    let code = CosetLdpcCode::linear(pcm);
    assert!(code.k() >= 1000);
}
