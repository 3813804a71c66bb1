//! The 6 × 8 convergence matrix as a grid.
//!
//! Rows pair consistency with the four rank patterns of `A` (`p×…`) and `B`
//! (`q×n`). Cells whose "Y" holds only when `B` has full column rank run on
//! a `q > n` shape where `r(B) = n < q`; every other cell uses the desk
//! shape with half rank by duplication.

use axb_core::{Family, Method};

use crate::grid::{Expect, Grid, GridCell, GridDefaults};

pub const DESK: [usize; 4] = [100, 40, 40, 100];
pub const TALL_B: [usize; 4] = [100, 40, 100, 40];

/// `(consistent, full rank A, full rank B)` in table order.
pub const ROWS: [(bool, bool, bool); 8] = [
    (true, true, true),
    (true, true, false),
    (true, false, true),
    (true, false, false),
    (false, true, true),
    (false, true, false),
    (false, false, true),
    (false, false, false),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entry {
    Y,
    N,
    /// "Y" provided `r(B) = n`.
    YFullColB,
}

use Entry::{YFullColB as Yn, N, Y};

/// Columns follow [`Method::ALL`].
pub const EXPECTED: [[Entry; 6]; 8] = [
    [Y, Y, Y, Y, Y, Y],
    [Y, N, Y, Yn, Y, Y],
    [Y, N, N, Y, Y, Y],
    [Y, N, Yn, N, Y, Y],
    [N, Y, Y, Y, Y, Y],
    [N, N, Yn, N, Y, Y],
    [N, N, N, Y, Y, Y],
    [N, N, Yn, N, Y, Y],
];

pub fn row_label(row: usize) -> String {
    let (consistent, fa, fb) = ROWS[row];
    format!(
        "{} r(A){}p r(B){}q",
        if consistent {
            "consistent"
        } else {
            "inconsistent"
        },
        if fa { "=" } else { "<" },
        if fb { "=" } else { "<" }
    )
}

pub fn cell(row: usize, col: usize) -> GridCell {
    let (consistent, fa, fb) = ROWS[row];
    let entry = EXPECTED[row][col];
    let dims = if entry == Yn { TALL_B } else { DESK };
    let [m, p, q, n] = dims;
    let rank_a = if fa { m.min(p) } else { m.min(p) / 2 };
    // On the tall shape r(B) < q already holds at full column rank.
    let rank_b = if fb || entry == Yn {
        q.min(n)
    } else {
        q.min(n) / 2
    };
    let method = Method::ALL[col];
    GridCell {
        label: format!(
            "{} {}{}",
            method.name(),
            row_label(row),
            if entry == Yn { " r(B)=n" } else { "" }
        ),
        method,
        dims: Some(dims),
        ranks: Some([rank_a, rank_b]),
        family: Family::Type1,
        cond: None,
        a_file: None,
        b_file: None,
        a_transpose: false,
        b_transpose: false,
        consistent,
        delta: None,
        seed: None,
        expect: Some(if entry == N { Expect::N } else { Expect::Y }),
    }
}

/// All 48 cells, row by row.
pub fn convergence_grid() -> Grid {
    Grid {
        defaults: GridDefaults::default(),
        cells: (0..8)
            .flat_map(|r| (0..6).map(move |c| cell(r, c)))
            .collect(),
    }
}

/// The shipped grid file.
pub const FIXTURE: &str = include_str!("../grids/convergence.toml");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_matches_generated_grid() {
        assert_eq!(Grid::from_toml(FIXTURE).unwrap(), convergence_grid());
    }

    #[test]
    fn shape_of_matrix() {
        let g = convergence_grid();
        assert_eq!(g.cells.len(), 48);
        // Extended methods never fail in the table.
        for c in g.cells.iter().filter(|c| c.method.is_two_phase()) {
            assert_eq!(c.expect, Some(Expect::Y));
        }
        // CME-RK converges exactly on the consistent rows.
        for c in g.cells.iter().filter(|c| c.method == Method::CmeRk) {
            assert_eq!(c.expect == Some(Expect::Y), c.consistent);
        }
        let tall: Vec<_> = g.cells.iter().filter(|c| c.dims == Some(TALL_B)).collect();
        assert_eq!(tall.len(), 4);
        for c in tall {
            assert_eq!(c.ranks.unwrap()[1], 40);
        }
    }

    #[test]
    fn desk_ranks() {
        let c = cell(3, 0);
        assert_eq!(c.dims, Some(DESK));
        assert_eq!(c.ranks, Some([20, 20]));
        assert!(c.consistent);
        let c = cell(4, 1);
        assert_eq!(c.ranks, Some([40, 40]));
        assert!(!c.consistent);
    }
}
