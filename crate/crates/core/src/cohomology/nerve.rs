//! The nerve of a cover: index subsets with nonempty intersection, each
//! tagged with that intersection.

use crate::topology::{MaximalCover, OpenSet};

/// One simplex: a sorted tuple of cover-block indices and the intersection
/// of the named blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub indices: Vec<usize>,
    pub open: OpenSet,
}

#[derive(Clone, Debug)]
pub struct Nerve {
    blocks: Vec<OpenSet>,
    /// cells[p] holds the dimension-p simplices in lexicographic index order.
    cells: Vec<Vec<Cell>>,
}

impl Nerve {
    pub fn blocks(&self) -> &[OpenSet] {
        &self.blocks
    }

    pub fn cells(&self, dim: usize) -> &[Cell] {
        self.cells.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Largest dimension with any cell; 0 for a nonempty cover.
    pub fn top_dimension(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn position(&self, dim: usize, indices: &[usize]) -> Option<usize> {
        self.cells(dim).iter().position(|c| c.indices == indices)
    }
}

/// All index subsets with nonempty intersection, built by extending
/// simplices one index at a time. Downward closure holds because
/// intersections only shrink as indices are added.
pub fn build_nerve(cover: &MaximalCover) -> Nerve {
    let blocks: Vec<OpenSet> = cover.blocks().iter().copied().collect();
    let mut cells: Vec<Vec<Cell>> = Vec::new();
    let vertices: Vec<Cell> = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(i, &b)| Cell { indices: vec![i], open: b })
        .collect();
    if vertices.is_empty() {
        return Nerve { blocks, cells };
    }
    cells.push(vertices);
    loop {
        let prev = cells.last().expect("pushed above");
        let mut next = Vec::new();
        for cell in prev {
            let last = *cell.indices.last().expect("cells are nonempty");
            for j in last + 1..blocks.len() {
                let open = cell.open.inter(blocks[j]);
                if open.is_empty() {
                    continue;
                }
                let mut indices = cell.indices.clone();
                indices.push(j);
                next.push(Cell { indices, open });
            }
        }
        if next.is_empty() {
            break;
        }
        cells.push(next);
    }
    Nerve { blocks, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::FiniteTopology;
    use std::collections::BTreeSet;

    fn os(vars: &[usize]) -> OpenSet {
        OpenSet::from_vars(vars.iter().copied())
    }

    #[test]
    fn single_block_cover_has_one_vertex() {
        let top = FiniteTopology::trivial(os(&[0, 1]));
        let nerve = build_nerve(&MaximalCover::trivial(&top));
        assert_eq!(nerve.cells(0).len(), 1);
        assert_eq!(nerve.top_dimension(), 0);
    }

    #[test]
    fn disjoint_blocks_have_no_edge() {
        let top = FiniteTopology::discrete(os(&[0, 1]));
        let cover =
            MaximalCover::new(&top, BTreeSet::from([os(&[0]), os(&[1])])).unwrap();
        let nerve = build_nerve(&cover);
        assert_eq!(nerve.cells(0).len(), 2);
        assert_eq!(nerve.cells(1).len(), 0);
    }

    #[test]
    fn triangle_boundary_shape() {
        // three pairwise-overlapping blocks with empty triple intersection
        let top = FiniteTopology::discrete(os(&[0, 1, 2]));
        let cover = MaximalCover::new(
            &top,
            BTreeSet::from([os(&[0, 1]), os(&[1, 2]), os(&[0, 2])]),
        )
        .unwrap();
        let nerve = build_nerve(&cover);
        assert_eq!(nerve.cells(0).len(), 3);
        assert_eq!(nerve.cells(1).len(), 3);
        assert_eq!(nerve.cells(2).len(), 0);
        // edges are tagged with the single shared variable
        for cell in nerve.cells(1) {
            assert_eq!(cell.open.len(), 1);
        }
        assert_eq!(nerve.position(1, &[0, 1]), Some(0));
    }
}
