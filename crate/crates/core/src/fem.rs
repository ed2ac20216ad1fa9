//! 1D finite element machinery: meshes with region tags, nodal Lagrange
//! bases on Gauss-Lobatto points, and precomputed reference-element tables.

use crate::quad::{gauss_legendre, gauss_lobatto};
use crate::{Error, Result};

/// Region tag of a mesh element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Interior,
    Layer,
}

/// 1D mesh given by ascending element boundaries, a polynomial order and a
/// region tag per element.
#[derive(Debug, Clone)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    order: usize,
    tags: Vec<Region>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>, order: usize, tags: Vec<Region>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("mesh needs at least one element".into()));
        }
        if order < 1 {
            return Err(Error::InvalidArgument("element order must be >= 1".into()));
        }
        if tags.len() != nodes.len() - 1 {
            return Err(Error::InvalidArgument(
                "one region tag per element required".into(),
            ));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("mesh nodes must be ascending".into()));
        }
        Ok(Self { nodes, order, tags })
    }

    /// Uniform mesh of `[a, b]` with `n_interior` elements, plus a layer
    /// `[b, b + width]` with elements of comparable size when `width > 0`.
    pub fn uniform_with_layer(
        a: f64,
        b: f64,
        n_interior: usize,
        width: f64,
        order: usize,
    ) -> Result<Self> {
        if !(b > a) || n_interior == 0 {
            return Err(Error::InvalidArgument("bad interval".into()));
        }
        let mut nodes = Vec::new();
        let mut tags = Vec::new();
        for i in 0..=n_interior {
            nodes.push(a + (b - a) * i as f64 / n_interior as f64);
        }
        tags.extend(std::iter::repeat(Region::Interior).take(n_interior));
        if width > 0.0 {
            let h = (b - a) / n_interior as f64;
            let n_layer = (width / h).round().max(1.0) as usize;
            for i in 1..=n_layer {
                nodes.push(b + width * i as f64 / n_layer as f64);
            }
            tags.extend(std::iter::repeat(Region::Layer).take(n_layer));
        }
        Self::new(nodes, order, tags)
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn tag(&self, e: usize) -> Region {
        self.tags[e]
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.nodes
    }
}

/// Nodal Lagrange basis on a fixed set of reference nodes in [-1, 1].
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
}

impl LagrangeBasis {
    /// Gauss-Lobatto nodal basis of the given polynomial order.
    pub fn lobatto(order: usize) -> Self {
        Self {
            nodes: gauss_lobatto(order),
        }
    }

    /// Gauss-Legendre (interior) nodal basis: order + 1 nodes, no endpoint
    /// nodes; the natural choice for discontinuous fields.
    pub fn legendre(order: usize) -> Self {
        Self {
            nodes: gauss_legendre(order + 1).0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of all shape functions at x.
    pub fn eval(&self, x: f64) -> Vec<f64> {
        let m = self.nodes.len();
        let mut v = vec![0.0; m];
        for i in 0..m {
            let mut prod = 1.0;
            for j in 0..m {
                if j != i {
                    prod *= (x - self.nodes[j]) / (self.nodes[i] - self.nodes[j]);
                }
            }
            v[i] = prod;
        }
        v
    }

    /// Derivatives of all shape functions at x.
    pub fn eval_deriv(&self, x: f64) -> Vec<f64> {
        let m = self.nodes.len();
        let mut d = vec![0.0; m];
        for i in 0..m {
            let mut acc = 0.0;
            for k in 0..m {
                if k == i {
                    continue;
                }
                let mut prod = 1.0 / (self.nodes[i] - self.nodes[k]);
                for j in 0..m {
                    if j != i && j != k {
                        prod *= (x - self.nodes[j]) / (self.nodes[i] - self.nodes[j]);
                    }
                }
                acc += prod;
            }
            d[i] = acc;
        }
        d
    }
}

/// Reference-element tables: shape values and derivatives at quadrature
/// points, shared by all assembly routines.
#[derive(Debug, Clone)]
pub struct RefTables {
    /// quadrature nodes on [-1, 1]
    pub qx: Vec<f64>,
    pub qw: Vec<f64>,
    /// v[q][i]: continuous-basis value at node q
    pub cg_v: Vec<Vec<f64>>,
    pub cg_d: Vec<Vec<f64>>,
    /// discontinuous-basis values (order k - 1)
    pub dg_v: Vec<Vec<f64>>,
    pub n_cg: usize,
    pub n_dg: usize,
}

impl RefTables {
    /// Tables for continuous order k and discontinuous order k-1 with a
    /// Gauss rule exact through polynomial degree `2k + extra`.
    pub fn build(order: usize, extra_degree: usize) -> Self {
        let npts = order + 2 + extra_degree.div_ceil(2);
        let (qx, qw) = gauss_legendre(npts);
        let cg = LagrangeBasis::lobatto(order);
        let dg = LagrangeBasis::legendre(order - 1);
        let cg_v: Vec<Vec<f64>> = qx.iter().map(|&x| cg.eval(x)).collect();
        let cg_d: Vec<Vec<f64>> = qx.iter().map(|&x| cg.eval_deriv(x)).collect();
        let dg_v: Vec<Vec<f64>> = qx.iter().map(|&x| dg.eval(x)).collect();
        Self {
            qx,
            qw,
            cg_v,
            cg_d,
            dg_v,
            n_cg: cg.len(),
            n_dg: dg.len(),
        }
    }
}
