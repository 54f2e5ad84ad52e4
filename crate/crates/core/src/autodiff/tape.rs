use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{AutodiffError, Scalar};

/// Elementary operation recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opcode {
    Input,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    /// Affine map with a constant: `a·x + b`.
    Affine,
    /// Smooth unary function applied through [`Scalar::chain`].
    Unary,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Opcode,
    args: [u32; 2],
    partials: [f64; 2],
}

/// Append-only record of scalar operations for reverse-mode differentiation.
///
/// Nodes only ever reference earlier nodes, so a single reverse sweep visits
/// each recorded input exactly once.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a value recorded on a tape.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var(#{}, {})", self.index, self.value)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            nodes: RefCell::new(Vec::with_capacity(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Drop all nodes. Requires exclusive access so no live `Var` can dangle.
    pub fn clear(&mut self) {
        self.nodes.get_mut().clear();
    }

    /// Record an independent input.
    pub fn input(&self, value: f64) -> Var<'_> {
        let index = self.push(Opcode::Input, [0, 0], [0.0, 0.0]);
        Var { tape: self, index, value }
    }

    fn push(&self, op: Opcode, args: [u32; 2], partials: [f64; 2]) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let index = u32::try_from(nodes.len()).expect("tape exceeds u32 nodes");
        debug_assert!(args.iter().all(|&a| a <= index), "tape node references a later node");
        nodes.push(Node { op, args, partials });
        index
    }

    /// Reverse sweep from `output`, returning the adjoint of every node.
    pub fn gradient(&self, output: Var<'_>) -> Result<Adjoints, AutodiffError> {
        assert!(
            std::ptr::eq(output.tape, self),
            "output variable was recorded on a different tape"
        );
        let nodes = self.nodes.borrow();
        let n = output.index as usize + 1;
        let mut adj = vec![0.0_f64; n];
        adj[n - 1] = 1.0;
        for i in (0..n).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            if !a.is_finite() {
                return Err(AutodiffError::NonFiniteAdjoint {
                    node: i,
                    op: format!("{:?}", nodes[i].op),
                });
            }
            let node = nodes[i];
            match node.op {
                Opcode::Input => {}
                Opcode::Neg | Opcode::Affine | Opcode::Unary => {
                    adj[node.args[0] as usize] += a * node.partials[0];
                }
                Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div => {
                    adj[node.args[0] as usize] += a * node.partials[0];
                    adj[node.args[1] as usize] += a * node.partials[1];
                }
            }
        }
        Ok(Adjoints { adj })
    }
}

/// Adjoints produced by [`Tape::gradient`].
#[derive(Clone, Debug)]
pub struct Adjoints {
    adj: Vec<f64>,
}

impl Adjoints {
    /// d(output)/d(var); zero for variables recorded after the output.
    pub fn wrt(&self, var: Var<'_>) -> f64 {
        self.adj.get(var.index as usize).copied().unwrap_or(0.0)
    }
}

impl<'t> Var<'t> {
    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    fn binary(self, other: Self, op: Opcode, value: f64, partials: [f64; 2]) -> Self {
        debug_assert!(std::ptr::eq(self.tape, other.tape));
        let index = self.tape.push(op, [self.index, other.index], partials);
        Var { tape: self.tape, index, value }
    }

    fn unary(self, op: Opcode, value: f64, partial: f64) -> Self {
        let index = self.tape.push(op, [self.index, 0], [partial, 0.0]);
        Var { tape: self.tape, index, value }
    }

    /// Sum of a non-empty slice of variables.
    pub fn sum(vars: &[Var<'t>]) -> Var<'t> {
        let mut it = vars.iter();
        let first = *it.next().expect("sum of empty slice");
        it.fold(first, |acc, &v| acc + v)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        self.binary(b, Opcode::Add, self.value + b.value, [1.0, 1.0])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self.binary(b, Opcode::Sub, self.value - b.value, [1.0, -1.0])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        self.binary(b, Opcode::Mul, self.value * b.value, [b.value, self.value])
    }
}

impl<'t> Div for Var<'t> {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q = self.value / b.value;
        self.binary(b, Opcode::Div, q, [1.0 / b.value, -q / b.value])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(Opcode::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Self;
    fn add(self, b: f64) -> Self {
        self.unary(Opcode::Affine, self.value + b, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Self;
    fn sub(self, b: f64) -> Self {
        self.unary(Opcode::Affine, self.value - b, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Self;
    fn mul(self, b: f64) -> Self {
        self.unary(Opcode::Affine, self.value * b, b)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Self;
    fn div(self, b: f64) -> Self {
        self.unary(Opcode::Affine, self.value / b, 1.0 / b)
    }
}

impl<'t> Scalar for Var<'t> {
    fn value(&self) -> f64 {
        self.value
    }

    fn chain(self, d: [f64; 4]) -> Self {
        self.unary(Opcode::Unary, d[0], d[1])
    }
}

/// Gradient of a scalar loss with respect to a flat parameter vector.
///
/// `loss` receives the tape and one input variable per parameter and must
/// return the loss recorded on that tape. Returns `(loss value, gradient)`.
pub fn grad_params<F>(params: &[f64], loss: F) -> Result<(f64, Vec<f64>), AutodiffError>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::with_capacity(params.len() * 4);
    let vars: Vec<Var<'_>> = params.iter().map(|&p| tape.input(p)).collect();
    let out = loss(&tape, &vars);
    let adj = tape.gradient(out)?;
    Ok((out.value(), vars.iter().map(|&v| adj.wrt(v)).collect()))
}
