//! Worked instances used by the reproduction suite and the tests.
//!
//! Grids and chains are built programmatically; matrices are transcribed from
//! the worked 4x3 grid example, the four-point chain example and the discrete
//! bipath example.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::exactlin::{Field, Mat};
use crate::height::{HeightDiff, Rational};
use crate::pmod::PersistenceModule;
use crate::poset::FinitePoset;

/// 4x3 grid with `phi(v_i_j) = i + j` and the indecomposable module `M`.
pub struct GridExample {
    pub rho: HeightDiff,
    pub m: Arc<PersistenceModule>,
}

/// Index of `v_i_j` on a grid poset.
pub fn at(p: &FinitePoset, i: usize, j: usize) -> usize {
    p.grid_index(&[i as i64, j as i64]).expect("inside the grid")
}

/// Dimensions on the 4x3 grid, listed row by row from `j = 2` down to `j = 0`.
pub fn grid_dims(rows: [[usize; 4]; 3]) -> Vec<usize> {
    let mut dims = vec![0; 12];
    for (r, row) in rows.iter().enumerate() {
        let j = 2 - r;
        for (i, &d) in row.iter().enumerate() {
            dims[i * 3 + j] = d;
        }
    }
    dims
}

pub fn grid_example(field: Field) -> Result<GridExample> {
    let p = Arc::new(FinitePoset::grid(&[4, 3])?);
    let phi: Vec<i64> = p.grid_info().expect("grid").coords.iter().map(|c| (c[0] + c[1]) as i64).collect();
    let rho = HeightDiff::from_phi_ints(p.clone(), &phi)?;
    let dims = grid_dims([[1, 1, 0, 0], [1, 2, 1, 1], [0, 0, 0, 0]]);
    let v = |i, j| at(&p, i, j);
    let mut maps = HashMap::new();
    maps.insert((v(0, 1), v(1, 1)), Mat::from_rows(field, &[vec![1], vec![0]]));
    maps.insert((v(1, 1), v(2, 1)), Mat::from_rows(field, &[vec![1, 0]]));
    maps.insert((v(2, 1), v(3, 1)), Mat::identity(field, 1));
    maps.insert((v(0, 2), v(1, 2)), Mat::identity(field, 1));
    maps.insert((v(0, 1), v(0, 2)), Mat::identity(field, 1));
    maps.insert((v(1, 1), v(1, 2)), Mat::from_rows(field, &[vec![1, 1]]));
    let m = PersistenceModule::new(p.clone(), field, dims, maps)?;
    Ok(GridExample { rho, m: Arc::new(m) })
}

/// Printed dimensions of `L_1 M` and `R_1 M` for the grid example, in `grid_dims` layout.
pub const GRID_L1_DIMS: [[usize; 4]; 3] = [[1, 2, 0, 0], [0, 1, 2, 1], [0, 0, 0, 0]];
pub const GRID_R1_DIMS: [[usize; 4]; 3] = [[1, 0, 0, 0], [2, 2, 1, 0], [0, 1, 0, 1]];

/// `k_{J_1} ⊕ k_{(1,2)} ⊕ k_{(2,1)}`, the claimed decomposition of `L_1 M`.
pub fn grid_left_decomposition(p: &Arc<FinitePoset>, field: Field) -> Result<PersistenceModule> {
    let j1 = grid_interval(p, field, &[(0, 2), (1, 2), (1, 1), (2, 1), (3, 1)])?;
    let a = grid_interval(p, field, &[(1, 2)])?;
    let b = grid_interval(p, field, &[(2, 1)])?;
    PersistenceModule::direct_sum_all(p.clone(), field, &[&j1, &a, &b])
}

/// `k_{J_2} ⊕ k_{J_3} ⊕ k_{(3,0)}`, the claimed decomposition of `R_1 M`.
pub fn grid_right_decomposition(p: &Arc<FinitePoset>, field: Field) -> Result<PersistenceModule> {
    let j2 = grid_interval(p, field, &[(0, 1), (1, 1), (2, 1)])?;
    let j3 = grid_interval(p, field, &[(1, 0), (0, 1), (1, 1), (0, 2)])?;
    let c = grid_interval(p, field, &[(3, 0)])?;
    PersistenceModule::direct_sum_all(p.clone(), field, &[&j2, &j3, &c])
}

/// Interval module on the grid given by `(i, j)` coordinates.
pub fn grid_interval(p: &Arc<FinitePoset>, field: Field, cells: &[(usize, usize)]) -> Result<PersistenceModule> {
    let mut set: Vec<usize> = cells.iter().map(|&(i, j)| at(p, i, j)).collect();
    set.sort_unstable();
    PersistenceModule::interval(p.clone(), field, &set)
}

/// Four-point chain `a < b < c < d` with `phi = (0, 1, C+1, 2C+1)` and the
/// interval modules `M = [a, d]`, `X = [a, c]`, `N = [a, b]`.
pub struct ChainExample {
    pub rho: HeightDiff,
    pub m: Arc<PersistenceModule>,
    pub x: Arc<PersistenceModule>,
    pub n: Arc<PersistenceModule>,
}

pub fn chain_example(field: Field, c: &Rational) -> Result<ChainExample> {
    let p = Arc::new(FinitePoset::chain(&["a", "b", "c", "d"])?);
    let one = Rational::from_integer(1.into());
    let phi = vec![Rational::from_integer(0.into()), one.clone(), c + &one, c + c + &one];
    let rho = HeightDiff::from_phi(p.clone(), &phi)?;
    let m = Arc::new(PersistenceModule::interval(p.clone(), field, &[0, 1, 2, 3])?);
    let x = Arc::new(PersistenceModule::interval(p.clone(), field, &[0, 1, 2])?);
    let n = Arc::new(PersistenceModule::interval(p, field, &[0, 1])?);
    Ok(ChainExample { rho, m, x, n })
}

/// Discrete bipath: two chains `s < c_1 < ... < c_{G-1} < t` and
/// `s < d_1 < ... < d_{G-1} < t` with `phi(c_z) = phi(d_z) = z`, and `M = k_B`.
pub struct BipathExample {
    pub rho: HeightDiff,
    pub m: Arc<PersistenceModule>,
}

pub fn bipath_poset(g: usize) -> Result<FinitePoset> {
    let mut names = vec!["s".to_string()];
    names.extend((1..g).map(|z| format!("c{z}")));
    names.extend((1..g).map(|z| format!("d{z}")));
    names.push("t".to_string());
    let mut rel = Vec::new();
    for side in ["c", "d"] {
        let mut prev = "s".to_string();
        for z in 1..g {
            let cur = format!("{side}{z}");
            rel.push((prev, cur.clone()));
            prev = cur;
        }
        rel.push((prev, "t".to_string()));
    }
    FinitePoset::new(&names, &rel)
}

pub fn bipath_example(field: Field, g: usize) -> Result<BipathExample> {
    let p = Arc::new(bipath_poset(g)?);
    let phi: Vec<i64> = p
        .names()
        .iter()
        .map(|n| match n.as_str() {
            "s" => 0,
            "t" => g as i64,
            other => other[1..].parse().expect("numbered element"),
        })
        .collect();
    let rho = HeightDiff::from_phi_ints(p.clone(), &phi)?;
    let all: Vec<usize> = (0..p.len()).collect();
    let m = Arc::new(PersistenceModule::interval(p, field, &all)?);
    Ok(BipathExample { rho, m })
}

/// `k_{[from, t]}` along one side of the bipath.
pub fn bipath_tail(p: &Arc<FinitePoset>, field: Field, side: &str, from: usize, g: usize) -> Result<PersistenceModule> {
    let mut set: Vec<usize> = (from..g).map(|z| p.index_of(&format!("{side}{z}"))).collect::<Result<_>>()?;
    set.push(p.index_of("t")?);
    set.sort_unstable();
    PersistenceModule::interval(p.clone(), field, &set)
}

/// Diamond `a < b, c < d` with `phi = (0, 1, 1, 2)`; the smallest poset without
/// connected intersections.
pub fn diamond() -> Result<HeightDiff> {
    let p = Arc::new(FinitePoset::new(&["a", "b", "c", "d"], &[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")])?);
    HeightDiff::from_phi_ints(p, &[0, 1, 1, 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::GF2;

    #[test]
    fn grid_module_is_commutative_with_expected_dims() {
        let ex = grid_example(GF2).unwrap();
        assert_eq!(ex.m.dims(), grid_dims([[1, 1, 0, 0], [1, 2, 1, 1], [0, 0, 0, 0]]).as_slice());
        let p = ex.m.poset();
        // v01 -> v12 along either route
        assert_eq!(ex.m.map(at(p, 0, 1), at(p, 1, 2)), &Mat::identity(GF2, 1));
    }

    #[test]
    fn bipath_shape() {
        let ex = bipath_example(GF2, 8).unwrap();
        assert_eq!(ex.m.poset().len(), 16);
        assert!(!ex.m.poset().is_diamond_free());
        let p = ex.m.poset();
        assert_eq!(ex.rho.rho(p.index_of("s").unwrap(), p.index_of("t").unwrap()), &crate::height::Ext::int(8));
    }
}
