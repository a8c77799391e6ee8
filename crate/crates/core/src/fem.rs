//! P1 finite-element assembly for `∇²u = f` on the unit square with `u = 0`
//! on the boundary.
//!
//! The weak form gives `K u = -F` with `K` the (SPD) stiffness matrix and `F`
//! the load vector, so the assembled system is `A = K`, `b = -F` restricted to
//! the interior nodes.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::mesh::{interior_nodes, signed_area, Mesh};
use crate::sparse::{CooMatrix, CsrMatrix};

const MIN_AREA: f64 = 1e-14;

type Point = (f64, f64);

/// Right-hand side selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rhs {
    /// `sin(3π(x−y))·sin(2π(x+y))`.
    #[default]
    Paper,
    Zero,
}

impl Rhs {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            Rhs::Paper => evaluate_rhs(x, y),
            Rhs::Zero => 0.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rhs::Paper => "paper",
            Rhs::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(Rhs::Paper),
            "zero" => Some(Rhs::Zero),
            _ => None,
        }
    }
}

pub fn evaluate_rhs(x: f64, y: f64) -> f64 {
    libm::sin(3.0 * PI * (x - y)) * libm::sin(2.0 * PI * (x + y))
}

fn checked_area(p0: Point, p1: Point, p2: Point) -> Result<f64> {
    let area = signed_area(p0, p1, p2);
    if area.abs() <= MIN_AREA {
        return Err(Error::SingularElement { area });
    }
    Ok(area.abs())
}

/// `K[i][j] = ∫ ∇φᵢ·∇φⱼ` over the triangle for linear hat functions.
pub fn element_stiffness(p0: Point, p1: Point, p2: Point) -> Result<[[f64; 3]; 3]> {
    let area = checked_area(p0, p1, p2)?;
    let p = [p0, p1, p2];
    // Gradient of φᵢ is (b[i], c[i]) / (2·signed area); the sign cancels in the product.
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        b[i] = p[j].1 - p[k].1;
        c[i] = p[k].0 - p[j].0;
    }
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// `F[i] = ∫ f·φᵢ` by the three-point mid-edge rule (exact for quadratics).
pub fn element_load(p0: Point, p1: Point, p2: Point, f: impl Fn(f64, f64) -> f64) -> Result<[f64; 3]> {
    let area = checked_area(p0, p1, p2)?;
    let mid = |a: Point, b: Point| f(0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let f01 = mid(p0, p1);
    let f12 = mid(p1, p2);
    let f20 = mid(p2, p0);
    // Each hat function is 1/2 at the midpoints of its two incident edges, 0 at the third.
    let w = area / 3.0 * 0.5;
    Ok([w * (f01 + f20), w * (f01 + f12), w * (f12 + f20)])
}

/// Reduced SPD system over the interior degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSystem {
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    /// Mesh node id of each DOF.
    pub dof_to_node: Vec<usize>,
}

impl FemSystem {
    /// Wraps an arbitrary square system; DOF `i` maps to node `i`.
    pub fn from_parts(a: CsrMatrix, b: Vec<f64>) -> Result<Self> {
        if a.n_rows() != a.n_cols() || a.n_rows() != b.len() {
            return Err(invalid("system matrix must be square and match the right-hand side"));
        }
        if b.is_empty() {
            return Err(Error::EmptySystem);
        }
        let dof_to_node = (0..b.len()).collect();
        Ok(Self { a, b, dof_to_node })
    }

    pub fn n_dofs(&self) -> usize {
        self.b.len()
    }
}

fn for_each_element(
    mesh: &Mesh,
    mut visit: impl FnMut([usize; 3], [(f64, f64); 3]) -> Result<()>,
) -> Result<()> {
    for e in &mesh.elements {
        visit(e.node_ids, mesh.points(e))?;
    }
    Ok(())
}

/// Stiffness matrix over all mesh nodes, boundary included.
pub fn global_stiffness(mesh: &Mesh) -> Result<CsrMatrix> {
    let n = mesh.node_count();
    let mut coo = CooMatrix::new(n, n);
    for_each_element(mesh, |ids, [p0, p1, p2]| {
        let k = element_stiffness(p0, p1, p2)?;
        for (r, &gr) in ids.iter().enumerate() {
            for (c, &gc) in ids.iter().enumerate() {
                coo.push(gr, gc, k[r][c]);
            }
        }
        Ok(())
    })?;
    Ok(coo.to_csr())
}

pub fn assemble(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Result<FemSystem> {
    let dof_to_node = interior_nodes(mesh);
    if dof_to_node.is_empty() {
        return Err(Error::EmptySystem);
    }
    let mut node_to_dof = alloc::vec![None; mesh.node_count()];
    for (dof, &node) in dof_to_node.iter().enumerate() {
        node_to_dof[node] = Some(dof);
    }

    let n = dof_to_node.len();
    let mut coo = CooMatrix::new(n, n);
    let mut load = alloc::vec![0.0; n];
    for_each_element(mesh, |ids, [p0, p1, p2]| {
        let k = element_stiffness(p0, p1, p2)?;
        let fe = element_load(p0, p1, p2, &f)?;
        let dofs = ids.map(|id| node_to_dof[id]);
        for r in 0..3 {
            let Some(dr) = dofs[r] else { continue };
            load[dr] += fe[r];
            for c in 0..3 {
                if let Some(dc) = dofs[c] {
                    coo.push(dr, dc, k[r][c]);
                }
            }
        }
        Ok(())
    })?;

    let b = load.into_iter().map(|v| -v).collect();
    Ok(FemSystem { a: coo.to_csr(), b, dof_to_node })
}
