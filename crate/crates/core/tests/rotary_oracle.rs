mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_matches_hand_stepped_examples() {
    assert_eq!(rotary_oracle(&[0b00, 0b01, 0b11]), vec![false]);
    assert_eq!(rotary_oracle(&[0b00, 0b10, 0b11]), vec![true]);
    assert_eq!(rotary_oracle(&[0b00, 0b01, 0b00, 0b01, 0b11, 0b01, 0b11]), vec![false]);
    // two detents need the 00 in between
    assert_eq!(rotary_oracle(&[0b00, 0b01, 0b11, 0b10, 0b00, 0b10, 0b11]), vec![false, true]);
}

#[test]
fn filter_agrees_with_oracle_on_random_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..300 {
        let seq = random_rotary_sequence(&mut rng);
        let got = rotary_filter_events(&seq);
        let dirs: Vec<bool> = got.iter().map(|e| e.1).collect();
        assert_eq!(dirs, rotary_oracle(&seq), "{seq:?}");
        let idx: Vec<usize> = got.iter().map(|e| e.0).collect();
        assert!(idx.iter().all(|&i| seq[i] == 0b11));
        assert!(events_all_rearmed(&seq, &idx));
    }
}

proptest! {
    #[test]
    fn filter_agrees_with_oracle_on_arbitrary_samples(seq in proptest::collection::vec(0u8..4, 0..120)) {
        let dirs: Vec<bool> = rotary_filter_events(&seq).iter().map(|e| e.1).collect();
        prop_assert_eq!(dirs, rotary_oracle(&seq));
    }
}
