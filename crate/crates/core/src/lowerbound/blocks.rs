//! Block structure of the walks of X and Y on an adversarial path.
//!
//! The adversary fixes each node's bit and port orientation when the agent first
//! arrives there. Since the agent is deterministic, those choices can be made
//! offline by simulating once, which yields an ordinary explicit initialization.

use serde::Serialize;

use crate::algorithms::EndpointBehavior;
use crate::engine::Stop;
use crate::lowerbound::table::TransitionTable1Bit;
use crate::lowerbound::walk::{engine_run, PathInit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Dir {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Block {
    LR,
    RL,
    LRL,
    RLR,
}

impl Block {
    pub fn moves(self) -> &'static [Dir] {
        match self {
            Block::LR => &[Dir::L, Dir::R],
            Block::RL => &[Dir::R, Dir::L],
            Block::LRL => &[Dir::L, Dir::R, Dir::L],
            Block::RLR => &[Dir::R, Dir::L, Dir::R],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
    pub trailing: Option<Dir>,
}

impl BlockDecomposition {
    pub fn moves(&self) -> Vec<Dir> {
        let mut out: Vec<Dir> = self.blocks.iter().flat_map(|b| b.moves().iter().copied()).collect();
        out.extend(self.trailing);
        out
    }
}

/// Splits a walk (node positions on a path in index order) into blocks.
///
/// Two-move blocks start exactly at first visits, three-move blocks start at
/// revisits, no other move is a first visit, and each block starts in the
/// direction the previous one ended in.
pub fn decompose_blocks(positions: &[usize]) -> Result<BlockDecomposition, String> {
    let mut moves = Vec::new();
    let mut discovery = Vec::new();
    let mut seen = std::collections::HashSet::new();
    if let Some(&p) = positions.first() {
        seen.insert(p);
    }
    for w in positions.windows(2) {
        let d = match w[1] as i64 - w[0] as i64 {
            1 => Dir::R,
            -1 => Dir::L,
            _ => return Err(format!("{} -> {} is not a path move", w[0], w[1])),
        };
        moves.push(d);
        discovery.push(seen.insert(w[1]));
    }
    let mut blocks = Vec::new();
    let mut i = 0;
    let mut trailing = None;
    while i < moves.len() {
        if let Some(prev) = blocks.last() {
            let last = *Block::moves(*prev).last().unwrap();
            if moves[i] != last {
                return Err(format!("move {i} reverses direction at a block boundary"));
            }
        }
        let len = if discovery[i] { 2 } else { 3 };
        if i + len > moves.len() {
            if i + 1 == moves.len() && discovery[i] {
                trailing = Some(moves[i]);
                break;
            }
            return Err(format!("walk ends inside a block at move {i}"));
        }
        let block = match (len, moves[i]) {
            (2, Dir::L) => Block::LR,
            (2, Dir::R) => Block::RL,
            (3, Dir::L) => Block::LRL,
            (_, _) => Block::RLR,
        };
        if moves[i..i + len] != *block.moves() {
            return Err(format!("moves {i}..{} do not form {block:?}", i + len));
        }
        if discovery[i + 1..i + len].iter().any(|&d| d) {
            return Err(format!("first visit inside block {block:?} at move {i}"));
        }
        blocks.push(block);
        i += len;
    }
    Ok(BlockDecomposition { blocks, trailing })
}

/// Builds the adversarial initialization for a table whose port depends only on
/// the agent bit (X and Y): every newly reached node sends the agent straight
/// back, with the agent bit flipped relative to the one it left with.
///
/// The start node (either middle node), its bit and orientation and the start
/// state are free. Among the choices whose walk splits into blocks, the one
/// with the longest cover is returned.
pub fn adversarial_path(table: &TransitionTable1Bit, n: usize) -> Option<PathInit> {
    assert!(n >= 3);
    let endpoint = EndpointBehavior::from_table(table);
    let mut starts = vec![n / 2, (n - 1) / 2];
    starts.dedup();
    let mut best: Option<(u64, PathInit)> = None;
    for start in starts {
        for choice in 0u8..8 {
            let Some(init) = construct(table, endpoint, n, start, choice & 1 == 1, choice & 2 != 0, choice & 4 != 0) else {
                continue;
            };
            let Some(walk) = cover_walk(table, &init) else {
                continue;
            };
            let c = walk.len() as u64 - 1;
            if decompose_blocks(&walk).is_ok() && best.as_ref().is_none_or(|(b, _)| c > *b) {
                best = Some((c, init));
            }
        }
    }
    best.map(|(_, init)| init)
}

fn construct(
    table: &TransitionTable1Bit,
    endpoint: EndpointBehavior,
    n: usize,
    start: usize,
    start_bit: bool,
    start_orient: bool,
    state: bool,
) -> Option<PathInit> {
    let mut bits: Vec<Option<bool>> = vec![None; n];
    let mut orient: Vec<Option<bool>> = vec![None; n];
    bits[start] = Some(start_bit);
    orient[start] = Some(start_orient);
    let mut cur = bits.iter().map(|b| b.unwrap_or(false)).collect::<Vec<_>>();
    let mut pos = start;
    let mut a = state;
    let mut visited = vec![false; n];
    visited[start] = true;
    for _ in 0..100 * n * n {
        if visited.iter().all(|&v| v) {
            break;
        }
        let leaving = a;
        let (na, nv, next) = if pos == 0 || pos == n - 1 {
            let (na, nv) = endpoint.get(a, cur[pos]);
            (na, nv, if pos == 0 { 1 } else { n - 2 })
        } else {
            let (na, nv, p) = table.r3(a, cur[pos]);
            let o = orient[pos].expect("visited internal nodes are fixed");
            (na, nv, if p ^ o { pos - 1 } else { pos + 1 })
        };
        cur[pos] = nv;
        a = na;
        let from = pos;
        pos = next;
        if !visited[pos] {
            visited[pos] = true;
            // Choose the bit so that the agent comes back with the flipped state.
            let back = |u: bool| {
                if pos == 0 || pos == n - 1 {
                    endpoint.get(a, u).0
                } else {
                    table.agent(a, u)
                }
            };
            let u = [false, true].into_iter().find(|&u| back(u) != leaving).unwrap_or(false);
            bits[pos] = Some(u);
            cur[pos] = u;
            if pos != 0 && pos != n - 1 {
                // Port P(a, u) must lead back to `from`.
                let p = table.port(a, u);
                let towards_left = from < pos;
                orient[pos] = Some(p ^ towards_left);
            }
        }
    }
    if !visited.iter().all(|&v| v) {
        return None;
    }
    Some(PathInit {
        bits: bits.iter().map(|b| b.unwrap_or(false)).collect(),
        orientation: (1..n - 1).map(|i| orient[i].unwrap_or(true)).collect(),
        start,
        state,
    })
}

/// Positions visited by the engine until the path is covered.
pub fn cover_walk(table: &TransitionTable1Bit, init: &PathInit) -> Option<Vec<usize>> {
    let endpoint = EndpointBehavior::from_table(table);
    let n = init.n();
    let out = engine_run(table, endpoint, init, Stop::AllVisited, 100 * (n * n) as u64, true);
    out.cover_time?;
    let path = init.path().ok()?;
    let mut pos = vec![init.start];
    for r in out.trace.expect("trace requested") {
        if let Some(port) = r.out_port {
            pos.push(path.tree().neighbor(r.position, port)?);
        }
    }
    Some(pos)
}

/// `(n - 2)(3n + 1) / 2 + 1`: two-move blocks for n - 2 discoveries, a final
/// single move, and 1 + 2 + ... + (n - 2) three-move blocks between them.
pub fn block_bound(n: usize) -> u64 {
    let n = n as u64;
    (n - 2) * (3 * n + 1) / 2 + 1
}

/// Length of the block walk from a middle start: the crossings between
/// discoveries take 0, 1, ..., n - 3 three-move blocks, so this is
/// `block_bound(n) - 3(n - 2)`.
pub fn middle_block_walk(n: usize) -> u64 {
    let n = n as u64;
    2 * (n - 2) + 1 + 3 * (n - 3) * (n - 2) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_rejects_double_step() {
        assert!(decompose_blocks(&[2, 3, 4]).is_err());
        let walk = [2, 3, 2, 1, 2, 3, 2, 3, 4];
        let d = decompose_blocks(&walk).unwrap();
        assert_eq!(d.blocks, vec![Block::RL, Block::LR, Block::RLR]);
        assert_eq!(d.trailing, Some(Dir::R));
        assert_eq!(d.moves().len(), walk.len() - 1);
    }
}
