use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shearpack::adversary::{compute_home, play, Adversary, CoarsenParams, CoarseningAdversary, TieBreak};
use shearpack::sorting::{choose_params, run_stream};
use shearpack::{BalancedSorter, BoxSorter, OnlineSorter, Rat, Result, SortArray};

fn stream(max_len: usize) -> impl Strategy<Value = Vec<Rat>> {
    prop::collection::vec(0i64..=1 << 16, 1..max_len)
        .prop_map(|v| v.into_iter().map(|k| Rat::new(k, 1 << 16)).collect())
}

/// Sum of absolute differences along `0, filled cells left to right, 1`.
fn cost_oracle(array: &SortArray) -> Rat {
    let zero = Rat::zero();
    let one = Rat::one();
    let mut seq = vec![&zero];
    seq.extend(array.cells().iter().flatten());
    seq.push(&one);
    seq.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Puts every real into a uniformly random empty cell.
struct RandomSorter(ChaCha8Rng);

impl OnlineSorter for RandomSorter {
    fn place(&mut self, array: &SortArray, _x: &Rat) -> Result<usize> {
        let empty: Vec<usize> = (0..array.len()).filter(|&c| array.is_empty_cell(c)).collect();
        Ok(empty[self.0.gen_range(0..empty.len())])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn balanced_sorter_fills_distinct_cells(values in stream(400)) {
        let n = values.len();
        let mut array = SortArray::with_capacity(n, n);
        let cells = run_stream(&mut BalancedSorter::new(n), &mut array, &values).unwrap();
        let mut seen = cells.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), n);
        prop_assert!(array.is_full());
        let cost = array.total_cost().unwrap();
        prop_assert_eq!(&cost, &cost_oracle(&array));
        prop_assert!(cost >= Rat::one());
        prop_assert!(&cost * &cost <= Rat::from_int(324) * Rat::from_usize(n));
    }

    #[test]
    fn box_sorter_stays_in_capacity(values in stream(600), eps in prop_oneof![Just((1, 2)), Just((1, 1)), Just((2, 1))]) {
        let n = values.len().max(4);
        let mut values = values;
        values.resize(n, Rat::new(1, 2));
        let epsilon = Rat::new(eps.0, eps.1);
        let params = choose_params(n, &epsilon).unwrap();
        prop_assert!(params.capacity_factor() <= Rat::one() + &epsilon);
        let mut sorter = BoxSorter::new(n, params).unwrap();
        let cap = sorter.capacity();
        let mut array = SortArray::with_capacity(n, cap);
        let cells = run_stream(&mut sorter, &mut array, &values).unwrap();
        prop_assert!(cells.iter().all(|&c| c < cap));
        prop_assert_eq!(array.filled_count(), n);
        prop_assert_eq!(array.total_cost().unwrap(), cost_oracle(&array));
    }

    #[test]
    fn incremental_homes_match_full_scan(seed in any::<u64>(), steps in 1usize..200) {
        let n = 256;
        let params = CoarsenParams::for_instance(n, &Rat::one()).unwrap();
        let mut adv = CoarseningAdversary::new(n, params.clone(), TieBreak::Random { seed });
        let mut sorter = RandomSorter(ChaCha8Rng::seed_from_u64(seed));
        let mut array = SortArray::with_capacity(n, n);
        for _ in 0..steps {
            if play(&mut adv, &mut sorter, &mut array, 1).is_err() {
                break;
            }
        }
        let phase = adv.phase().max(1);
        let radius = params.spacing(phase, n) / Rat::from_int(2);
        let marked = adv.marked_flags();
        let empty = (0..array.len()).filter(|&c| array.is_empty_cell(c)).count();
        let sizes = adv.home_sizes();
        prop_assert!(sizes.iter().sum::<usize>() <= 2 * empty);
        for (k, &size) in sizes.iter().enumerate() {
            let mut fast = adv.home_report(&array, k);
            fast.home.sort_unstable();
            let slow = compute_home(&fast.value, &array, &marked, &radius, params.small_home_below(phase));
            prop_assert_eq!(&fast.home, &slow.home, "grid point {}", k);
            prop_assert_eq!(size, slow.home.len());
        }
    }

    #[test]
    fn coarsening_values_lie_on_the_first_grid(seed in any::<u64>()) {
        let n = 1 << 10;
        let params = CoarsenParams::for_instance(n, &Rat::one()).unwrap();
        let mut adv = CoarseningAdversary::new(n, params, TieBreak::Random { seed });
        let mut sorter = RandomSorter(ChaCha8Rng::seed_from_u64(seed ^ 1));
        let mut array = SortArray::with_capacity(n, n);
        for _ in 0..n {
            let Ok(x) = adv.next_real(&array) else { break };
            prop_assert!(adv.on_first_grid(&x));
            let cell = sorter.place(&array, &x).unwrap();
            array.place(cell, x).unwrap();
            adv.observe(&array, cell).unwrap();
        }
        prop_assert!(adv.issued() <= n);
        prop_assert!(adv.deserted_spaces_disjoint());
    }
}
