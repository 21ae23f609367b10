use std::cell::UnsafeCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Scalar;

/// One recorded primitive: indices of its operands and the local partial
/// derivatives of the result with respect to each. Partials are evaluated at
/// record time, so the backward pass needs no primal values and no opcode.
#[derive(Clone, Copy)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
}

/// Reverse-mode tape: an append-only record of every primitive applied to
/// [`Var`]s created from it. Operand indices always precede their consumers,
/// so a single reverse sweep propagates adjoints.
///
/// A tape is exclusively owned by one evaluation; `UnsafeCell` makes it
/// `!Sync`, so exclusivity is enforced at compile time. Concurrent
/// evaluations each use their own tape.
#[derive(Default)]
pub struct Tape {
    // Tape recording sits on the hot path of every traced simulation; the
    // arena is an UnsafeCell to make a push a plain bounds-checked Vec push.
    // SAFETY invariant: the interior Vec is only touched inside this module,
    // each access is confined to one non-reentrant method call, and the type
    // is !Sync, so no two references to the Vec can coexist.
    nodes: UnsafeCell<Vec<Node>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        Self {
            nodes: UnsafeCell::new(Vec::with_capacity(nodes)),
        }
    }

    /// Number of recorded nodes.
    #[inline]
    pub fn len(&self) -> usize {
        // SAFETY: shared read confined to this call; see the field invariant.
        unsafe { (*self.nodes.get()).len() }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Discards all recorded nodes but keeps the allocation, invalidating
    /// every `Var` previously created from this tape. Callers reuse one tape
    /// across evaluations to avoid regrowing a large arena.
    pub fn reset(&self) {
        // SAFETY: exclusive access confined to this call.
        unsafe { (*self.nodes.get()).clear() }
    }

    /// Registers a differentiation input (a leaf node).
    #[inline]
    pub fn input(&self, value: f64) -> Var<'_> {
        let index = self.push(Node {
            parents: [0, 0],
            partials: [0.0, 0.0],
        });
        Var {
            tape: Some(self),
            index,
            value,
        }
    }

    /// Lifts a constant onto this tape's lifetime without recording a node.
    #[inline]
    pub fn constant(&self, value: f64) -> Var<'_> {
        Var {
            tape: None,
            index: 0,
            value,
        }
    }

    #[inline]
    fn push(&self, node: Node) -> u32 {
        // SAFETY: exclusive access confined to this call; push does not
        // re-enter tape code.
        let nodes = unsafe { &mut *self.nodes.get() };
        let index = nodes.len();
        assert!(index < u32::MAX as usize, "tape overflow: > 2^32 - 1 nodes");
        nodes.push(node);
        index as u32
    }

    /// Propagates adjoints backward from `output`, returning d(output)/d(node)
    /// for every recorded node. Replaying the recorded partials never touches
    /// primal values, so the forward result is left untouched.
    pub fn backward(&self, output: Var<'_>) -> Adjoints {
        // SAFETY: shared read for the duration of the sweep; backward records
        // nothing and the single-threaded tape admits no concurrent pushes.
        let nodes = unsafe { &*self.nodes.get() };
        let mut adjoints = vec![0.0; nodes.len()];
        let Some(tape) = output.tape else {
            // A constant output depends on no input.
            return Adjoints { values: adjoints };
        };
        debug_assert!(
            std::ptr::eq(tape, self),
            "output was recorded on a different tape"
        );
        adjoints[output.index as usize] = 1.0;
        for i in (0..=output.index as usize).rev() {
            let a = adjoints[i];
            if a == 0.0 {
                continue;
            }
            let node = nodes[i];
            adjoints[node.parents[0] as usize] += a * node.partials[0];
            adjoints[node.parents[1] as usize] += a * node.partials[1];
        }
        Adjoints { values: adjoints }
    }
}

/// The adjoint of every tape node after a backward pass.
pub struct Adjoints {
    values: Vec<f64>,
}

impl Adjoints {
    /// The gradient of the backward-pass output with respect to `var`.
    /// Constants have gradient 0 by definition.
    #[inline]
    pub fn get(&self, var: Var<'_>) -> f64 {
        match var.tape {
            Some(_) => self.values[var.index as usize],
            None => 0.0,
        }
    }
}

/// A scalar recorded on a [`Tape`]. Arithmetic on `Var`s appends nodes;
/// arithmetic between constants stays off the tape entirely.
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: Option<&'t Tape>,
    index: u32,
    value: f64,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.tape {
            Some(_) => write!(f, "Var({} @ {})", self.value, self.index),
            None => write!(f, "Var({} const)", self.value),
        }
    }
}

impl<'t> Var<'t> {
    #[inline]
    fn unary(self, value: f64, partial: f64) -> Var<'t> {
        match self.tape {
            None => Var {
                tape: None,
                index: 0,
                value,
            },
            Some(tape) => {
                let index = tape.push(Node {
                    parents: [self.index, 0],
                    partials: [partial, 0.0],
                });
                Var {
                    tape: Some(tape),
                    index,
                    value,
                }
            }
        }
    }

    #[inline]
    fn binary(self, rhs: Var<'t>, value: f64, d_lhs: f64, d_rhs: f64) -> Var<'t> {
        // Both operands recorded is the hot case on solver loops.
        if let (Some(a), Some(b)) = (self.tape, rhs.tape) {
            debug_assert!(std::ptr::eq(a, b), "operands from different tapes");
            let index = a.push(Node {
                parents: [self.index, rhs.index],
                partials: [d_lhs, d_rhs],
            });
            return Var {
                tape: Some(a),
                index,
                value,
            };
        }
        match self.tape.or(rhs.tape) {
            None => Var {
                tape: None,
                index: 0,
                value,
            },
            Some(tape) => {
                // The constant operand contributes through slot 0 with a zero
                // partial, which the backward pass ignores.
                let (p0, d0) = match self.tape {
                    Some(_) => (self.index, d_lhs),
                    None => (0, 0.0),
                };
                let (p1, d1) = match rhs.tape {
                    Some(_) => (rhs.index, d_rhs),
                    None => (0, 0.0),
                };
                let index = tape.push(Node {
                    parents: [p0, p1],
                    partials: [d0, d1],
                });
                Var {
                    tape: Some(tape),
                    index,
                    value,
                }
            }
        }
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let value = self.value / rhs.value;
        self.binary(rhs, value, 1.0 / rhs.value, -value / rhs.value)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    #[inline]
    fn neg(self) -> Self {
        self.unary(-self.value, -1.0)
    }
}

impl<'t> Scalar for Var<'t> {
    #[inline]
    fn constant(value: f64) -> Self {
        Var {
            tape: None,
            index: 0,
            value,
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    fn exp(self) -> Self {
        let value = self.value.exp();
        self.unary(value, value)
    }

    #[inline]
    fn ln(self) -> Self {
        self.unary(self.value.ln(), 1.0 / self.value)
    }

    #[inline]
    fn sin(self) -> Self {
        self.unary(self.value.sin(), self.value.cos())
    }

    #[inline]
    fn cos(self) -> Self {
        self.unary(self.value.cos(), -self.value.sin())
    }

    #[inline]
    fn abs(self) -> Self {
        if self.value >= 0.0 {
            self
        } else {
            -self
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if self.value <= other.value {
            self
        } else {
            other
        }
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self.value >= other.value {
            self
        } else {
            other
        }
    }

    #[inline]
    fn custom_unary(self, f: impl FnOnce(f64) -> (f64, f64)) -> Self {
        let (value, partial) = f(self.value);
        self.unary(value, partial)
    }

    #[inline]
    fn custom_binary(self, other: Self, f: impl FnOnce(f64, f64) -> (f64, f64, f64)) -> Self {
        let (value, d_self, d_other) = f(self.value, other.value);
        self.binary(other, value, d_self, d_other)
    }
}
