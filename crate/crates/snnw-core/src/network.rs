//! Feedforward network with a subspace layer.
//!
//! Architecture: input layer, `depth` Tanh hidden layers of uniform `width`,
//! a subspace layer of width `M` whose outputs are the base functions
//! `phi_bar_1 .. phi_bar_M`, and a linear output `u = sum_j omega_j phi_bar_j`
//! (no bias, no activation). With `depth = 0` the subspace layer connects
//! directly to the input.
//!
//! Forward evaluation is generic over [`Scalar`], so the same code produces
//! plain values, first-order jets, or second-order jets. Training gradients
//! come from a layer-level reverse pass over the cached jet activations
//! ([`Network::backward`]); it computes the same quantity as the scalar tape
//! in [`crate::autodiff::tape`] and is cross-checked against it in tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{seed_point, Jet2, Scalar};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Spatial dimension d of the input.
    pub input_dim: usize,
    /// Number of hidden layers (0 allowed).
    pub depth: usize,
    /// Neurons per hidden layer.
    pub width: usize,
    /// Subspace dimension M.
    pub subspace_dim: usize,
    /// Apply Tanh to the subspace layer (default true; a purely linear
    /// subspace layer would make the subspace a rank-limited linear image).
    pub subspace_activation: bool,
    /// PRNG seed for Xavier initialization.
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(input_dim: usize, depth: usize, width: usize, subspace_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            depth,
            width,
            subspace_dim,
            subspace_activation: true,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("input_dim must be >= 1".into()));
        }
        if self.width == 0 && self.depth > 0 {
            return Err(Error::Config("width must be >= 1".into()));
        }
        if self.subspace_dim == 0 {
            return Err(Error::Config("subspace_dim must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
struct LayerShape {
    in_dim: usize,
    out_dim: usize,
    w_off: usize,
    b_off: usize,
    activated: bool,
}

fn build_shapes(config: &NetworkConfig) -> (Vec<LayerShape>, usize) {
    let mut shapes = Vec::with_capacity(config.depth + 1);
    let mut off = 0;
    let mut in_dim = config.input_dim;
    for _ in 0..config.depth {
        shapes.push(LayerShape {
            in_dim,
            out_dim: config.width,
            w_off: off,
            b_off: off + in_dim * config.width,
            activated: true,
        });
        off += in_dim * config.width + config.width;
        in_dim = config.width;
    }
    shapes.push(LayerShape {
        in_dim,
        out_dim: config.subspace_dim,
        w_off: off,
        b_off: off + in_dim * config.subspace_dim,
        activated: config.subspace_activation,
    });
    off += in_dim * config.subspace_dim + config.subspace_dim;
    (shapes, off)
}

/// `out[i] = b[i] + sum_j w[i*in+j] * input[j]`
#[inline]
fn affine_forward<S: Scalar>(w: &[f64], b: &[f64], input: &[S], out: &mut [S]) {
    let in_dim = input.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &w[i * in_dim..(i + 1) * in_dim];
        let mut acc = S::from_f64(b[i]);
        for (wj, z) in row.iter().zip(input.iter()) {
            acc = acc + z.scale(*wj);
        }
        *o = acc;
    }
}

/// Reverse of [`affine_forward`]: accumulates weight/bias gradients and the
/// input cotangent. `cot_in` must be zeroed by the caller.
#[inline]
fn affine_backward<S: Scalar>(
    w: &[f64],
    input: &[S],
    cot_out: &[S],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    cot_in: &mut [S],
) {
    let in_dim = input.len();
    for (i, &c) in cot_out.iter().enumerate() {
        grad_b[i] += c.value();
        let row = &w[i * in_dim..(i + 1) * in_dim];
        let grow = &mut grad_w[i * in_dim..(i + 1) * in_dim];
        for (((wj, gwj), zj), cij) in row
            .iter()
            .zip(grow.iter_mut())
            .zip(input.iter())
            .zip(cot_in.iter_mut())
        {
            *gwj += S::pair(*zj, c);
            *cij = *cij + c.scale(*wj);
        }
    }
}

/// Per-point evaluation state reused across quadrature nodes.
pub struct Workspace<S> {
    /// `acts[0]` are the seeded inputs; `acts[l+1]` is layer `l`'s output.
    acts: Vec<Vec<S>>,
    /// Activation partials (1 - tanh^2) per activated layer.
    partials: Vec<Vec<S>>,
    cot_a: Vec<S>,
    cot_b: Vec<S>,
}

impl<S: Scalar> Workspace<S> {
    fn for_shapes(input_dim: usize, shapes: &[LayerShape]) -> Self {
        let mut acts = vec![vec![S::zero(); input_dim]];
        let mut partials = Vec::with_capacity(shapes.len());
        let mut max_dim = input_dim;
        for s in shapes {
            acts.push(vec![S::zero(); s.out_dim]);
            partials.push(vec![S::zero(); if s.activated { s.out_dim } else { 0 }]);
            max_dim = max_dim.max(s.out_dim);
        }
        Self {
            acts,
            partials,
            cot_a: vec![S::zero(); max_dim],
            cot_b: vec![S::zero(); max_dim],
        }
    }

    /// Base-function values from the last forward pass.
    pub fn phis(&self) -> &[S] {
        self.acts.last().expect("workspace has at least one layer")
    }
}

fn forward_layers<S: Scalar>(
    shapes: &[LayerShape],
    theta: &[f64],
    ws: &mut Workspace<S>,
) {
    for (l, s) in shapes.iter().enumerate() {
        let (prev, rest) = ws.acts.split_at_mut(l + 1);
        let input = &prev[l];
        let out = &mut rest[0];
        let w = &theta[s.w_off..s.w_off + s.in_dim * s.out_dim];
        let b = &theta[s.b_off..s.b_off + s.out_dim];
        affine_forward(w, b, input, out);
        if s.activated {
            for (o, p) in out.iter_mut().zip(ws.partials[l].iter_mut()) {
                let (t, d) = o.tanh_with_partial();
                *o = t;
                *p = d;
            }
        }
    }
}

/// MLP parameters theta (hidden + subspace layers) plus output coefficients
/// omega, stored as one flat vector `[W0, b0, W1, b1, ..., omega]`.
#[derive(Clone, Debug)]
pub struct Network {
    config: NetworkConfig,
    shapes: Vec<LayerShape>,
    params: Vec<f64>,
    omega_off: usize,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    schema: String,
    config: NetworkConfig,
    params: Vec<f64>,
}

const CHECKPOINT_SCHEMA: &str = "snnw-network-v1";

impl Network {
    /// Xavier-uniform initialization: weights drawn from
    /// `U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out)))`, biases zero,
    /// omega initialized as a 1-output linear layer. Fully determined by the
    /// config seed.
    pub fn init(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let (shapes, omega_off) = build_shapes(&config);
        let total = omega_off + config.subspace_dim;
        let mut params = vec![0.0; total];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for s in &shapes {
            let bound = (6.0 / (s.in_dim + s.out_dim) as f64).sqrt();
            for w in &mut params[s.w_off..s.b_off] {
                *w = rng.gen_range(-bound..bound);
            }
            // biases stay zero
        }
        let omega_bound = (6.0 / (config.subspace_dim + 1) as f64).sqrt();
        for w in &mut params[omega_off..] {
            *w = rng.gen_range(-omega_bound..omega_bound);
        }
        Ok(Self {
            config,
            shapes,
            params,
            omega_off,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn omega(&self) -> &[f64] {
        &self.params[self.omega_off..]
    }

    pub fn set_omega(&mut self, omega: &[f64]) {
        assert_eq!(omega.len(), self.config.subspace_dim);
        self.params[self.omega_off..].copy_from_slice(omega);
    }

    /// Offset of omega within the flat parameter vector.
    pub fn omega_offset(&self) -> usize {
        self.omega_off
    }

    pub fn workspace<S: Scalar>(&self) -> Workspace<S> {
        Workspace::for_shapes(self.config.input_dim, &self.shapes)
    }

    /// Forward pass caching activations and activation partials; returns the
    /// raw output `u = sum_j omega_j phi_bar_j(x)`.
    pub fn forward_cached<S: Scalar, const D: usize>(
        &self,
        x: &[f64; D],
        ws: &mut Workspace<S>,
    ) -> S {
        assert_eq!(D, self.config.input_dim, "input dimension mismatch");
        let seeds: [S; D] = seed_point(x);
        ws.acts[0].copy_from_slice(&seeds);
        forward_layers(&self.shapes, &self.params[..self.omega_off], ws);
        let mut u = S::zero();
        for (o, phi) in self.omega().iter().zip(ws.phis().iter()) {
            u = u + phi.scale(*o);
        }
        u
    }

    /// Reverse pass from the raw output's cotangent, accumulating into a flat
    /// gradient with the same layout as [`Network::params`]. Must be called
    /// with the workspace of the matching [`Network::forward_cached`].
    pub fn backward<S: Scalar>(&self, ws: &mut Workspace<S>, cot_u: S, grad: &mut [f64]) {
        assert_eq!(grad.len(), self.params.len());
        let m = self.config.subspace_dim;
        // Output layer: u = sum_j omega_j phi_j.
        let (grad_theta, grad_omega) = grad.split_at_mut(self.omega_off);
        let phis = ws.acts.last().expect("forward_cached not run");
        for (go, phi) in grad_omega.iter_mut().zip(phis.iter()) {
            *go += S::pair(*phi, cot_u);
        }
        for (c, o) in ws.cot_a[..m].iter_mut().zip(self.omega().iter()) {
            *c = cot_u.scale(*o);
        }

        // Hidden + subspace layers in reverse, ping-ponging the cotangent
        // between the two scratch buffers.
        let theta = &self.params[..self.omega_off];
        let mut out_in_b = false;
        for (l, s) in self.shapes.iter().enumerate().rev() {
            let (cot_out, cot_in) = if out_in_b {
                (&mut ws.cot_b, &mut ws.cot_a)
            } else {
                (&mut ws.cot_a, &mut ws.cot_b)
            };
            let cot_out = &mut cot_out[..s.out_dim];
            if s.activated {
                for (c, p) in cot_out.iter_mut().zip(ws.partials[l].iter()) {
                    *c = S::transpose_mul(*p, *c);
                }
            }
            let cot_in = &mut cot_in[..s.in_dim];
            cot_in.fill(S::zero());
            let w = &theta[s.w_off..s.w_off + s.in_dim * s.out_dim];
            let (gw, gb) = {
                let (left, right) = grad_theta.split_at_mut(s.b_off);
                (
                    &mut left[s.w_off..s.w_off + s.in_dim * s.out_dim],
                    &mut right[..s.out_dim],
                )
            };
            affine_backward(w, &ws.acts[l], cot_out, gw, gb, cot_in);
            out_in_b = !out_in_b;
        }
    }

    /// Output and all base functions at `x`, with exact spatial jets.
    pub fn forward_jets<const D: usize>(&self, x: &[f64; D]) -> (Jet2<D>, Vec<Jet2<D>>) {
        let mut ws = self.workspace::<Jet2<D>>();
        let u = self.forward_cached(x, &mut ws);
        (u, ws.phis().to_vec())
    }

    /// Plain evaluation of `u(x)`.
    pub fn forward_value<const D: usize>(&self, x: &[f64; D]) -> f64 {
        let mut ws = self.workspace::<f64>();
        self.forward_cached(x, &mut ws)
    }

    /// Read-only evaluator of the base functions; Galerkin work never touches
    /// theta again after this point.
    pub fn freeze_basis(&self) -> SubspaceBasis {
        SubspaceBasis {
            config: self.config,
            shapes: self.shapes.clone(),
            theta: self.params[..self.omega_off].to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&Checkpoint {
            schema: CHECKPOINT_SCHEMA.to_string(),
            config: self.config,
            params: self.params.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ckpt: Checkpoint = serde_json::from_str(text)?;
        if ckpt.schema != CHECKPOINT_SCHEMA {
            return Err(Error::Config(format!(
                "unknown checkpoint schema '{}'",
                ckpt.schema
            )));
        }
        ckpt.config.validate()?;
        let (shapes, omega_off) = build_shapes(&ckpt.config);
        let expected = omega_off + ckpt.config.subspace_dim;
        if ckpt.params.len() != expected {
            return Err(Error::Config(format!(
                "checkpoint has {} parameters, config requires {expected}",
                ckpt.params.len()
            )));
        }
        Ok(Self {
            config: ckpt.config,
            shapes,
            params: ckpt.params,
            omega_off,
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Frozen theta: a read-only evaluator of the base functions and their jets.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    config: NetworkConfig,
    shapes: Vec<LayerShape>,
    theta: Vec<f64>,
}

impl SubspaceBasis {
    pub fn subspace_dim(&self) -> usize {
        self.config.subspace_dim
    }

    pub fn input_dim(&self) -> usize {
        self.config.input_dim
    }

    pub fn workspace<S: Scalar>(&self) -> Workspace<S> {
        Workspace::for_shapes(self.config.input_dim, &self.shapes)
    }

    /// Evaluate all base functions into `out` (length M).
    pub fn eval_into<S: Scalar, const D: usize>(
        &self,
        x: &[f64; D],
        ws: &mut Workspace<S>,
        out: &mut [S],
    ) {
        assert_eq!(D, self.config.input_dim, "input dimension mismatch");
        assert_eq!(out.len(), self.config.subspace_dim);
        let seeds: [S; D] = seed_point(x);
        ws.acts[0].copy_from_slice(&seeds);
        forward_layers(&self.shapes, &self.theta, ws);
        out.copy_from_slice(ws.phis());
    }

    pub fn eval<S: Scalar, const D: usize>(&self, x: &[f64; D]) -> Vec<S> {
        let mut ws = self.workspace::<S>();
        let mut out = vec![S::zero(); self.config.subspace_dim];
        self.eval_into(x, &mut ws, &mut out);
        out
    }
}
