//! Reverse-mode tape over jet-valued nodes.
//!
//! The tape records a straight-line program whose intermediate values are
//! [`Jet2`] jets, so every node carries exact spatial derivatives. For the
//! reverse sweep each node's adjoint is a cotangent with the same layout, and
//! the locally stored partials are themselves jets: propagating through a node
//! is [`Scalar::transpose_mul_add`] with the stored partial. Seeding the value
//! slot of a scalar loss node therefore yields exact parameter gradients of
//! expressions that mix values, gradients and second derivatives (PDE
//! residuals, Ritz energies).
//!
//! The tape is the reference engine: it is rebuilt per evaluation and makes no
//! attempt to batch. Training uses the structurally equivalent layer-level
//! reverse pass in [`crate::network`], which is verified against this tape.

use super::jet::{Jet2, Scalar};
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Recorded operation. Binary ops read their partials from the operand
/// values; unary ops store the partial at record time.
#[derive(Clone, Copy, Debug)]
enum Op<const D: usize> {
    /// Leaf: constant jet (inputs, source values, seeds).
    Const,
    /// Leaf: trainable parameter occupying the given slot.
    Param(usize),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    /// Smooth unary map with its jet-valued partial d(out)/d(in).
    Unary(NodeId, Jet2<D>),
    /// Extract d(value)/dx_axis into the value slot of a constant jet.
    GradComponent(NodeId, usize),
    /// Extract d²(value)/dx_axis² into the value slot of a constant jet.
    Diag2Component(NodeId, usize),
}

#[derive(Clone, Copy, Debug)]
struct TapeNode<const D: usize> {
    op: Op<D>,
    value: Jet2<D>,
}

/// Append-only record of jet operations with registered parameter leaves.
#[derive(Clone, Debug, Default)]
pub struct Tape<const D: usize> {
    nodes: Vec<TapeNode<D>>,
    param_nodes: Vec<NodeId>,
}

impl<const D: usize> Tape<D> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            param_nodes: Vec::new(),
        }
    }

    /// Register a trainable parameter leaf and return its node.
    ///
    /// Parameters must be registered before any non-leaf node so that
    /// [`Tape::reset`] can truncate back to a parameters-only tape.
    pub fn param(&mut self, value: f64) -> NodeId {
        assert_eq!(
            self.nodes.len(),
            self.param_nodes.len(),
            "parameters must be registered before other nodes"
        );
        let slot = self.param_nodes.len();
        let id = self.push(Op::Param(slot), Jet2::constant(value));
        self.param_nodes.push(id);
        id
    }

    /// Overwrite the value of a registered parameter (between evaluations).
    pub fn set_param(&mut self, slot: usize, value: f64) {
        let id = self.param_nodes[slot];
        self.nodes[id].value = Jet2::constant(value);
    }

    pub fn num_params(&self) -> usize {
        self.param_nodes.len()
    }

    /// Drop every node recorded after the parameter leaves.
    pub fn reset(&mut self) {
        self.nodes.truncate(self.param_nodes.len());
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, value: Jet2<D>) -> NodeId {
        self.push(Op::Const, value)
    }

    pub fn value(&self, id: NodeId) -> Jet2<D> {
        self.nodes[id].value
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value + self.nodes[b].value;
        self.push(Op::Add(a, b), v)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value - self.nodes[b].value;
        self.push(Op::Sub(a, b), v)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let v = self.nodes[a].value * self.nodes[b].value;
        self.push(Op::Mul(a, b), v)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let v = self.nodes[a].value.scale(c);
        self.push(Op::Scale(a, c), v)
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        let x = self.nodes[a].value;
        let t = x.tanh();
        let one = Jet2::constant(1.0);
        self.push(Op::Unary(a, one - t * t), t)
    }

    pub fn sin(&mut self, a: NodeId) -> NodeId {
        let x = self.nodes[a].value;
        self.push(Op::Unary(a, x.cos()), x.sin())
    }

    pub fn cos(&mut self, a: NodeId) -> NodeId {
        let x = self.nodes[a].value;
        self.push(Op::Unary(a, -x.sin()), x.cos())
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        let x = self.nodes[a].value;
        let e = x.exp();
        self.push(Op::Unary(a, e), e)
    }

    /// New constant-jet node holding du/dx_axis of `a` as its value.
    pub fn grad_component(&mut self, a: NodeId, axis: usize) -> Result<NodeId> {
        if axis >= D {
            return Err(Error::Config(format!(
                "grad axis {axis} out of range for dimension {D}"
            )));
        }
        let v = Jet2::constant(self.nodes[a].value.g[axis]);
        Ok(self.push(Op::GradComponent(a, axis), v))
    }

    /// New constant-jet node holding d²u/dx_axis² of `a` as its value.
    pub fn diag2_component(&mut self, a: NodeId, axis: usize) -> Result<NodeId> {
        if axis >= D {
            return Err(Error::Config(format!(
                "diag2 axis {axis} out of range for dimension {D}"
            )));
        }
        let v = Jet2::constant(self.nodes[a].value.h[axis]);
        Ok(self.push(Op::Diag2Component(a, axis), v))
    }

    fn push(&mut self, op: Op<D>, value: Jet2<D>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TapeNode { op, value });
        id
    }

    /// Reverse sweep from `loss`: returns d(loss.value)/d(p) for every
    /// registered parameter, in slot order.
    pub fn backward(&self, loss: NodeId) -> Result<Vec<f64>> {
        if self.nodes.is_empty() {
            return Err(Error::Usage("backward on an empty tape".into()));
        }
        if loss >= self.nodes.len() {
            return Err(Error::Usage(format!(
                "loss node {loss} out of range (tape has {} nodes)",
                self.nodes.len()
            )));
        }

        let mut cot = vec![Jet2::<D>::constant(0.0); loss + 1];
        cot[loss].v = 1.0;

        for id in (0..=loss).rev() {
            let c = cot[id];
            if c == Jet2::constant(0.0) {
                continue;
            }
            match self.nodes[id].op {
                Op::Const | Op::Param(_) => {}
                Op::Add(a, b) => {
                    cot[a] = cot[a] + c;
                    cot[b] = cot[b] + c;
                }
                Op::Sub(a, b) => {
                    cot[a] = cot[a] + c;
                    cot[b] = cot[b] - c;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (self.nodes[a].value, self.nodes[b].value);
                    Scalar::transpose_mul_add(vb, c, &mut cot[a]);
                    Scalar::transpose_mul_add(va, c, &mut cot[b]);
                }
                Op::Scale(a, k) => {
                    cot[a] = cot[a] + c.scale(k);
                }
                Op::Unary(a, partial) => {
                    Scalar::transpose_mul_add(partial, c, &mut cot[a]);
                }
                Op::GradComponent(a, axis) => {
                    cot[a].g[axis] += c.v;
                }
                Op::Diag2Component(a, axis) => {
                    cot[a].h[axis] += c.v;
                }
            }
        }

        Ok(self
            .param_nodes
            .iter()
            .map(|&id| if id <= loss { cot[id].v } else { 0.0 })
            .collect())
    }
}
