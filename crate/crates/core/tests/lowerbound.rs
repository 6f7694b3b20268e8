use std::collections::HashSet;

use rand::Rng;
use treewalk::algorithms::EndpointBehavior;
use treewalk::engine::{RunStatus, Stop};
use treewalk::lowerbound::blocks::{adversarial_path, block_bound, cover_walk, decompose_blocks, middle_block_walk, Block};
use treewalk::lowerbound::classify::orbit_count;
use treewalk::lowerbound::gadgets::check_gadget;
use treewalk::lowerbound::table::{named_table, Entry, TABLE_COUNT};
use treewalk::lowerbound::threeports::{odd_input, qualifying_tables, threeports_check};
use treewalk::lowerbound::walk::{engine_run, verify_loop};
use treewalk::lowerbound::*;
use treewalk::topology::rng_from_seed;

#[test]
fn enumeration_covers_every_id() {
    let all: Vec<TransitionTable1Bit> = enumerate_tables().collect();
    assert_eq!(all.len(), 4096);
    assert!(all.iter().enumerate().all(|(i, t)| usize::from(t.id()) == i));
    let zero = TransitionTable1Bit::from_id(0).unwrap();
    for (a, v) in [(false, false), (false, true), (true, false), (true, true)] {
        assert_eq!(zero.get(a, v), Entry::new(false, false, false));
    }
    let mut rng = rng_from_seed(11);
    for _ in 0..100 {
        let id = rng.gen_range(0..TABLE_COUNT);
        let t = TransitionTable1Bit::from_id(id).unwrap();
        assert_eq!(TransitionTable1Bit::from_rows(*t.rows()).id(), id);
    }
    assert!(TransitionTable1Bit::from_id(TABLE_COUNT).is_err());
}

/// The group action written directly on octal digits.
fn act(id: u16, fa: u16, fv: u16, fp: u16) -> u16 {
    let digit = |k: u16| (id >> (3 * k)) & 7;
    let mask = fp | (fv << 1) | (fa << 2);
    (0..4u16)
        .map(|k| {
            let (a, v) = (k >> 1, k & 1);
            (digit(2 * (a ^ fa) + (v ^ fv)) ^ mask) << (3 * k)
        })
        .sum()
}

#[test]
fn orbit_count_matches_brute_force_and_burnside() {
    let group: Vec<(u16, u16, u16)> = (0..8).map(|g| (g >> 2 & 1, g >> 1 & 1, g & 1)).collect();
    let mut seen = vec![false; 4096];
    let mut orbits = 0;
    for id in 0..TABLE_COUNT {
        if seen[usize::from(id)] {
            continue;
        }
        orbits += 1;
        for &(fa, fv, fp) in &group {
            seen[usize::from(act(id, fa, fv, fp))] = true;
        }
    }
    let fixed: usize = group
        .iter()
        .map(|&(fa, fv, fp)| (0..TABLE_COUNT).filter(|&id| act(id, fa, fv, fp) == id).count())
        .sum();
    assert_eq!(fixed % 8, 0);
    assert_eq!(orbits, fixed / 8);
    assert_eq!(orbit_count(), orbits);
    for id in (0..TABLE_COUNT).step_by(37) {
        let t = TransitionTable1Bit::from_id(id).unwrap();
        let (canon, g) = t.canonicalize();
        let members: HashSet<u16> = group.iter().map(|&(fa, fv, fp)| act(id, fa, fv, fp)).collect();
        assert_eq!(canon, *members.iter().min().unwrap());
        assert_eq!(TransitionTable1Bit::from_id(canon).unwrap().relabel(g).id(), id);
    }
}

#[test]
fn canonical_fixed_points() {
    let zero = TransitionTable1Bit::from_id(0).unwrap();
    assert_eq!(zero.canonicalize().0, 0);
    let x = named_table("x").unwrap();
    let flipped = x.relabel(Symmetry { flip_a: true, flip_v: false, flip_p: false });
    assert_eq!(x.canonicalize().0, flipped.canonicalize().0);
}

#[test]
fn gadget_catalogue_passes() {
    let report = gadget_report();
    for t in &report.templates {
        assert!(t.pass, "{} failed: {:?}", t.name, t.first_failures);
        assert!(t.matched_tables > 0, "{} matches nothing", t.name);
    }
    for name in ["catalogue-4a/a", "catalogue-4a/a'", "catalogue-4b/a", "catalogue-4b/a'", "catalogue-12/a", "catalogue-12/a'", "catalogue-9", "catalogue-11"] {
        assert!(report.templates.iter().any(|t| t.name == name), "{name} missing");
    }
}

#[test]
fn fixed_point_gadgets_fire_exactly_on_fixed_points() {
    let suite = gadget_suite();
    let fixed: Vec<&GadgetTemplate> = suite.iter().filter(|t| t.name.starts_with("fixed-point/")).collect();
    assert_eq!(fixed.len(), 2);
    for t in enumerate_tables() {
        let has_fixed = [(false, false), (false, true), (true, false), (true, true)]
            .iter()
            .any(|&(a, v)| t.agent(a, v) == a && t.vertex(a, v) == v);
        let gadgets: Vec<GadgetSpec> = fixed.iter().flat_map(|tpl| tpl.instances(&t)).collect();
        assert_eq!(has_fixed, !gadgets.is_empty(), "table {}", t.id());
        for g in &gadgets {
            check_gadget(&t, g).unwrap();
        }
    }
}

#[test]
fn algorithm_z_loops_from_both_states() {
    let z = named_table("z").unwrap();
    let suite = gadget_suite();
    let mut states = HashSet::new();
    for tpl in suite.iter().filter(|t| t.name.starts_with("algorithm-z/")) {
        let gadgets = tpl.instances(&z);
        assert!(!gadgets.is_empty(), "{}", tpl.name);
        for g in gadgets {
            let period = verify_loop(&z, &g.init).unwrap();
            assert!(period > 0);
            states.insert(g.init.state);
        }
    }
    assert_eq!(states.len(), 2);
}

#[test]
fn two_node_paths_take_no_steps() {
    for id in [0, 1234, 4095] {
        let t = TransitionTable1Bit::from_id(id).unwrap();
        assert_eq!(worst_time_to_endpoint(&t, 2, Strategy::Exhaustive).steps(), 0);
    }
}

/// Worst time to an endpoint from the middle, by running the engine on every init.
fn engine_worst(table: &TransitionTable1Bit, n: usize) -> u64 {
    let k = n - 2;
    let mut worst = 0;
    for bits in 0u32..(1 << k) {
        for o in 0u32..(1 << k) {
            for state in [false, true] {
                let init = PathInit {
                    bits: (0..n).map(|j| j > 0 && j < n - 1 && bits >> (j - 1) & 1 == 1).collect(),
                    orientation: (0..k).map(|j| o >> j & 1 == 1).collect(),
                    start: n / 2,
                    state,
                };
                let out = engine_run(table, EndpointBehavior::from_table(table), &init, Stop::FirstEndpointVisited, 10 * (n * n) as u64, false);
                assert_eq!(out.status, RunStatus::EndpointReached);
                worst = worst.max(out.steps);
            }
        }
    }
    worst
}

#[test]
fn x_exhaustive_at_seven_matches_engine() {
    let x = named_table("x").unwrap();
    let r = worst_time_to_endpoint(&x, 7, Strategy::Exhaustive);
    assert_eq!(r.steps(), engine_worst(&x, 7));
    assert_eq!(r.steps(), 27);
    assert_eq!(time_to_endpoint_of(&x, &r.witness), 27);
}

fn time_to_endpoint_of(t: &TransitionTable1Bit, init: &PathInit) -> u64 {
    treewalk::lowerbound::walk::time_to_endpoint(t, init, 10_000).steps()
}

/// Every internal node holds a direction; the agent goes that way and the
/// direction flips. Worst time to an endpoint from the middle.
fn direction_rotor_worst(n: usize) -> u64 {
    let k = n - 2;
    let mut worst = 0;
    for dirs in 0u32..(1 << k) {
        let mut right: Vec<bool> = (0..k).map(|j| dirs >> j & 1 == 1).collect();
        let mut pos = n / 2;
        let mut steps = 0;
        while pos != 0 && pos != n - 1 {
            let d = &mut right[pos - 1];
            pos = if *d { pos + 1 } else { pos - 1 };
            *d = !*d;
            steps += 1;
        }
        worst = worst.max(steps);
    }
    worst
}

#[test]
fn rotor_like_table_matches_direction_rotor_at_nine() {
    let e = Entry::new;
    // Agent bit ignored, vertex bit flips, port equals the vertex bit.
    let t = TransitionTable1Bit::from_rows([e(false, true, false), e(false, false, true), e(true, true, false), e(true, false, true)]);
    for n in [5, 7, 9] {
        assert_eq!(worst_time_to_endpoint(&t, n, Strategy::Exhaustive).steps(), direction_rotor_worst(n), "n = {n}");
    }
}

#[test]
fn named_tables_classify() {
    for name in ["x", "y", "r"] {
        let c = classify(&named_table(name).unwrap());
        assert_eq!(c.verdict, Verdict::Superlinear, "{name}: {}", c.detail());
        let e = c.max_exponent().unwrap();
        assert!((1.8..2.5).contains(&e), "{name} exponent {e}");
    }
    for name in ["z", "q"] {
        let t = named_table(name).unwrap();
        let c = classify(&t);
        assert_eq!(c.verdict, Verdict::Loop, "{name}: {}", c.detail());
        for s in &c.starts {
            verify_loop(&t, s.witness.as_ref().unwrap()).unwrap();
        }
    }
}

#[test]
fn symmetry_transfer_keeps_verdicts() {
    let ids: Vec<u16> = (0..TABLE_COUNT).step_by(211).collect();
    let via = classify_all(&ids);
    for c in &via {
        let t = TransitionTable1Bit::from_id(c.id).unwrap();
        let direct = classify(&t);
        assert_eq!(direct.verdict, c.verdict, "table {}", c.id);
        for s in c.starts.iter().filter(|s| s.verdict == Verdict::Loop) {
            let w = s.witness.as_ref().unwrap();
            assert_eq!(w.state, s.state);
            verify_loop(&t, w).unwrap();
        }
    }
}

#[test]
fn adversarial_paths_split_into_blocks() {
    for name in ["x", "y"] {
        let t = named_table(name).unwrap();
        for n in 3..=12 {
            let init = adversarial_path(&t, n).unwrap();
            let walk = cover_walk(&t, &init).unwrap();
            let d = decompose_blocks(&walk).unwrap();
            assert_eq!(walk.len() as u64 - 1, middle_block_walk(n), "{name} n = {n}");
            let two = d.blocks.iter().filter(|b| matches!(b, Block::LR | Block::RL)).count();
            assert_eq!(two, n - 2);
            assert!(d.trailing.is_some());
        }
    }
}

#[test]
fn block_formula_values() {
    assert_eq!(block_bound(5), 25);
    assert_eq!(block_bound(6), 39);
    for n in 3..50 {
        assert_eq!(block_bound(n) - middle_block_walk(n), 3 * (n as u64 - 2));
    }
}

#[test]
fn three_equal_ports_force_returns_to_the_start() {
    let tables = qualifying_tables();
    assert!(!tables.is_empty());
    let mut covering = 0;
    for id in tables {
        let t = TransitionTable1Bit::from_id(id).unwrap();
        for state in [false, true] {
            for n in [3, 8] {
                let c = threeports_check(&t, n, state).unwrap();
                assert!(c.holds(), "table {id} n {n}: {c:?}");
                if let Some(cover) = c.cover_time {
                    assert!(cover >= c.bound);
                    assert_eq!(c.returns.len(), n - 2);
                    if n == 8 {
                        covering += 1;
                        assert!(cover >= 42);
                    } else {
                        assert!(cover >= 2);
                    }
                }
            }
        }
    }
    assert!(covering > 0);
    let x = named_table("x").unwrap();
    assert!(odd_input(&x).is_none());
}
