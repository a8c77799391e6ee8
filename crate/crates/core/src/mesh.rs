//! Structured triangulation of the unit square.
//!
//! Nodes sit on an `n_side × n_side` grid numbered row-major: node `(i, j)` has
//! id `j * n_side + i` and coordinates `(i, j) / (n_side - 1)`. Every grid
//! square is cut along its lower-left to upper-right diagonal into two
//! counter-clockwise right triangles.

use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub on_boundary: bool,
}

/// Triangle given by three node ids in counter-clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    pub node_ids: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub n_side: usize,
}

pub fn build_unit_square_mesh(n_side: usize) -> Result<Mesh> {
    if n_side < 2 {
        return Err(invalid(alloc::format!("n_side must be >= 2, got {n_side}")));
    }
    let last = n_side - 1;
    let denom = last as f64;
    let mut nodes = Vec::with_capacity(n_side * n_side);
    for j in 0..n_side {
        for i in 0..n_side {
            nodes.push(Node {
                id: j * n_side + i,
                x: i as f64 / denom,
                y: j as f64 / denom,
                on_boundary: i == 0 || j == 0 || i == last || j == last,
            });
        }
    }

    let mut elements = Vec::with_capacity(2 * last * last);
    for j in 0..last {
        for i in 0..last {
            let a = j * n_side + i;
            let b = a + 1;
            let c = b + n_side;
            let d = a + n_side;
            elements.push(Element { node_ids: [a, b, c] });
            elements.push(Element { node_ids: [a, c, d] });
        }
    }

    Ok(Mesh { nodes, elements, n_side })
}

/// Ascending ids of the nodes not on the boundary.
pub fn interior_nodes(mesh: &Mesh) -> Vec<usize> {
    mesh.nodes.iter().filter(|n| !n.on_boundary).map(|n| n.id).collect()
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn points(&self, element: &Element) -> [(f64, f64); 3] {
        element.node_ids.map(|id| {
            let n = &self.nodes[id];
            (n.x, n.y)
        })
    }

    pub fn signed_area(&self, element: &Element) -> f64 {
        let [p0, p1, p2] = self.points(element);
        signed_area(p0, p1, p2)
    }

    /// Grid indices `(i, j)` of a node id.
    pub fn grid_index(&self, id: usize) -> (usize, usize) {
        (id % self.n_side, id / self.n_side)
    }

    pub fn node_at(&self, i: usize, j: usize) -> usize {
        j * self.n_side + i
    }
}

pub(crate) fn signed_area(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> f64 {
    0.5 * ((p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeMap;

    #[test]
    fn rejects_tiny_grid() {
        assert!(build_unit_square_mesh(1).is_err());
        assert!(build_unit_square_mesh(0).is_err());
    }

    #[test]
    fn smallest_grid_has_no_interior() {
        let m = build_unit_square_mesh(2).unwrap();
        assert_eq!(m.node_count(), 4);
        assert_eq!(m.element_count(), 2);
        assert!(interior_nodes(&m).is_empty());
    }

    #[test]
    fn three_by_three_has_center_node() {
        let m = build_unit_square_mesh(3).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.element_count(), 8);
        let interior = interior_nodes(&m);
        assert_eq!(interior.len(), 1);
        let c = m.nodes[interior[0]];
        assert_eq!((c.x, c.y), (0.5, 0.5));
    }

    #[test]
    fn counts_by_enumeration() {
        for n in [2usize, 3, 5, 9, 17] {
            let m = build_unit_square_mesh(n).unwrap();
            assert_eq!(m.node_count(), n * n);
            assert_eq!(m.element_count(), 2 * (n - 1) * (n - 1));
            let interior = m.nodes.iter().filter(|n| !n.on_boundary).count();
            assert_eq!(interior, (n - 2) * (n - 2));
            assert_eq!(interior_nodes(&m).len(), interior);
            let boundary = m.nodes.iter().filter(|n| n.on_boundary).count();
            assert_eq!(boundary, 4 * (n - 1));
        }
        let m = build_unit_square_mesh(17).unwrap();
        assert_eq!((m.node_count(), m.element_count(), interior_nodes(&m).len()), (289, 512, 225));
    }

    #[test]
    fn boundary_flag_matches_coordinates() {
        let m = build_unit_square_mesh(7).unwrap();
        for n in &m.nodes {
            assert!((0.0..=1.0).contains(&n.x) && (0.0..=1.0).contains(&n.y));
            let on = n.x == 0.0 || n.x == 1.0 || n.y == 0.0 || n.y == 1.0;
            assert_eq!(on, n.on_boundary, "node {}", n.id);
        }
    }

    #[test]
    fn elements_are_ccw_and_cover_unit_area() {
        for n in [2usize, 4, 17, 33] {
            let m = build_unit_square_mesh(n).unwrap();
            let mut total = 0.0;
            for e in &m.elements {
                let a = m.signed_area(e);
                assert!(a > 0.0);
                let [p, q, r] = e.node_ids;
                assert!(p != q && q != r && p != r);
                assert!(e.node_ids.iter().all(|&id| id < m.node_count()));
                total += a;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_edges_shared_twice() {
        let m = build_unit_square_mesh(6).unwrap();
        let mut edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &m.elements {
            for k in 0..3 {
                let a = e.node_ids[k];
                let b = e.node_ids[(k + 1) % 3];
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        for ((a, b), count) in edges {
            let on_boundary_edge = {
                let (na, nb) = (m.nodes[a], m.nodes[b]);
                (na.x == nb.x && (na.x == 0.0 || na.x == 1.0))
                    || (na.y == nb.y && (na.y == 0.0 || na.y == 1.0))
            };
            assert_eq!(count, if on_boundary_edge { 1 } else { 2 }, "edge ({a},{b})");
        }
    }

    #[test]
    fn construction_is_deterministic() {
        assert_eq!(build_unit_square_mesh(9).unwrap(), build_unit_square_mesh(9).unwrap());
    }
}
