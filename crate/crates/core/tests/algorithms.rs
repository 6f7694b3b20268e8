use treewalk::algorithms::*;
use treewalk::engine::{cover_time, run, Monitor, RunOptions, RunStatus, Stop};
use treewalk::topology::{
    build_path, enumerate_port_labelings, enumerate_trees, random_memory, MemoryCell, MemoryInit,
    MemoryOdometer, PortLabeledTree,
};

fn clean_init(tree: &PortLabeledTree) -> MemoryInit<CleanMemCell> {
    MemoryInit::uniform(tree, |_| CleanMemCell::CLEAN)
}

#[test]
fn cleanmem_single_edge_takes_four_moves() {
    let p = build_path(2, &[]).unwrap();
    for start in 0..2 {
        let out = run(&cleanmem_model(), p.tree(), &clean_init(p.tree()), start, RunOptions::new(100, Stop::SelfTermination), &mut []);
        assert_eq!(out.status, RunStatus::Terminated);
        assert_eq!(out.steps, 4);
        assert_eq!(out.final_config.position, start);
    }
}

#[test]
fn token_single_edge_takes_four_moves_for_every_far_cell() {
    let p = build_path(2, &[]).unwrap();
    let start_cell = TokenCell { last: 1, parent: None, root: false };
    for far in TokenCell::admissible(1) {
        let init = MemoryInit::explicit(p.tree(), vec![start_cell, far]).unwrap();
        let out = run(&token_model(), p.tree(), &init, 0, RunOptions::new(100, Stop::SelfTermination), &mut []);
        assert_eq!(out.status, RunStatus::Terminated);
        assert_eq!(out.steps, 4);
        assert_eq!(out.final_config.position, 0);
        assert_eq!(out.final_config.token_node, Some(0));
    }
}

#[test]
fn cleanmem_star_all_labelings() {
    let star = PortLabeledTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let mut count = 0;
    for t in enumerate_port_labelings(&star) {
        let out = run(&cleanmem_model(), &t, &clean_init(&t), 0, RunOptions::new(1000, Stop::SelfTermination), &mut []);
        assert_eq!(out.status, RunStatus::Terminated);
        assert_eq!(out.visited_count, 4);
        assert_eq!(out.final_config.position, 0);
        count += 1;
    }
    assert_eq!(count, 6);
}

#[test]
fn token_path_three_edge_use() {
    let p = build_path(3, &[true]).unwrap();
    for tree in enumerate_port_labelings(p.tree()) {
        for start in 0..3 {
            let base = vec![TokenCell { last: 1, parent: None, root: false }; 3];
            let mut odo = MemoryOdometer::new(&tree, &base, &[]);
            while let Some(cells) = odo.current() {
                let mut edges = EdgeUseMonitor::new(3);
                let mut props = TokenPropertyMonitor::new();
                let out = run(
                    &token_model(),
                    &tree,
                    &MemoryInit::explicit(&tree, cells.to_vec()).unwrap(),
                    start,
                    RunOptions::new(100, Stop::SelfTermination),
                    &mut [&mut edges, &mut props],
                );
                assert_eq!(out.status, RunStatus::Terminated);
                assert!(out.steps <= 12);
                assert!(edges.violations().is_empty(), "{:?}", edges.violations());
                assert!(props.violations().is_empty(), "{:?}", props.violations());
                odo.advance();
            }
        }
    }
}

#[test]
fn token_ignores_the_start_cell() {
    // The first transition overwrites every field of the start cell unread.
    for seed in 0..20 {
        let tree = treewalk::topology::random_tree(9, seed).unwrap();
        let init: MemoryInit<TokenCell> = random_memory(&tree, seed + 100);
        let reference = run(&token_model(), &tree, &init, 0, RunOptions::new(1000, Stop::SelfTermination).with_trace(), &mut []);
        for cell in TokenCell::admissible(tree.degree(0)) {
            let mut cells = init.cells.clone();
            cells[0] = cell;
            let other = run(&token_model(), &tree, &MemoryInit::explicit(&tree, cells).unwrap(), 0, RunOptions::new(1000, Stop::SelfTermination), &mut []);
            assert_eq!(other.steps, reference.steps);
            assert_eq!(other.final_config.node_states, reference.final_config.node_states);
        }
    }
}

#[test]
fn monitors_do_not_change_the_trace() {
    let tree = treewalk::topology::random_tree(15, 4).unwrap();
    let init: MemoryInit<TokenCell> = random_memory(&tree, 5);
    let plain = run(&token_model(), &tree, &init, 3, RunOptions::new(1000, Stop::SelfTermination).with_trace(), &mut []);
    let mut props = TokenPropertyMonitor::new();
    let mut edges = EdgeUseMonitor::new(3);
    let watched = run(&token_model(), &tree, &init, 3, RunOptions::new(1000, Stop::SelfTermination).with_trace(), &mut [&mut props, &mut edges]);
    let a = serde_json::to_string(&plain.trace).unwrap();
    let b = serde_json::to_string(&watched.trace).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cleanmem_breaks_under_some_dirty_memory() {
    // Search for a dirty init on which the clean-memory algorithm fails.
    let p = build_path(3, &[true]);
    let tree = p.unwrap().into_tree();
    let base = vec![CleanMemCell::CLEAN; 3];
    let mut odo = MemoryOdometer::new(&tree, &base, &[]);
    let mut failure = None;
    while let Some(cells) = odo.current() {
        let init = MemoryInit::explicit(&tree, cells.to_vec()).unwrap();
        let out = run(&cleanmem_model(), &tree, &init, 1, RunOptions::new(200, Stop::SelfTermination).with_loops(), &mut []);
        let ok = out.status == RunStatus::Terminated && out.visited_count == 3 && out.final_config.position == 1;
        if !ok {
            failure = Some((cells.to_vec(), out.status));
            break;
        }
        odo.advance();
    }
    assert!(failure.is_some(), "every dirty init still explored the path");
}

#[test]
fn rotor_single_edge_covers_in_one_move() {
    let p = build_path(2, &[]).unwrap();
    let init = MemoryInit::uniform(p.tree(), |_| RotorCell { last: 1 });
    assert_eq!(cover_time(&rotor_model(), p.tree(), &init, 0, 10), Some(1));
}

#[test]
fn rotor_cover_within_envelope_on_small_trees() {
    for n in 2..=6 {
        for shape in enumerate_trees(n).unwrap() {
            for tree in enumerate_port_labelings(&shape) {
                let base = vec![RotorCell { last: 1 }; n];
                let mut odo = MemoryOdometer::new(&tree, &base, &[]);
                while let Some(cells) = odo.current() {
                    let init = MemoryInit::explicit(&tree, cells.to_vec()).unwrap();
                    for start in 0..n {
                        let c = cover_time(&rotor_model(), &tree, &init, start, 10_000).expect("rotor covers");
                        assert!(c <= 2 * (n as u64 - 1) * n as u64);
                    }
                    odo.advance();
                }
            }
        }
    }
}

#[test]
fn named_tables_are_distinct() {
    let ids: Vec<u16> = ["x", "y", "z", "r", "q"].iter().map(|n| named_table(n).unwrap().id()).collect();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            assert_ne!(ids[i], ids[j]);
        }
    }
}
