//! Operator-overloading automatic differentiation with forward (dual-number)
//! and reverse (tape) modes.
//!
//! Any computation written against the [`Scalar`] trait can be evaluated three
//! ways without code changes:
//!
//! * `f64` — plain evaluation, no derivative bookkeeping;
//! * [`Dual`] — forward mode, one directional derivative per pass;
//! * [`Var`] — reverse mode, the gradient of one scalar output with respect
//!   to every input from a single recorded [`Tape`].
//!
//! All three implementations perform bit-identical primal arithmetic, so a
//! program traced with zero tangents reproduces its plain-`f64` trajectory
//! exactly.
//!
//! Control flow must branch on primal values only (via [`Scalar::value`]);
//! tangents and adjoints never influence which branch runs. `min`/`max`/`abs`
//! take the derivative of the branch selected by the primal, with ties
//! resolved to the first argument.

mod dual;
mod scalar;
mod tape;

pub use dual::Dual;
pub use scalar::Scalar;
pub use tape::{Adjoints, Tape, Var};

/// Evaluates `f` at `x` with forward mode, seeding the tangents from
/// `direction`. Returns the primal outputs and the directional derivatives
/// `d(outputs)/d(direction)` from a single pass.
///
/// ```
/// use autodiff::{forward_directional, Scalar};
///
/// // f(x, y) = (x·y, x + y), differentiated along e₀
/// let (outputs, tangents) =
///     forward_directional(|v| vec![v[0] * v[1], v[0] + v[1]], &[3.0, 5.0], &[1.0, 0.0]);
/// assert_eq!(outputs, vec![15.0, 8.0]);
/// assert_eq!(tangents, vec![5.0, 1.0]);
/// ```
///
/// # Panics
///
/// Panics if `x` and `direction` differ in length.
pub fn forward_directional<F>(f: F, x: &[f64], direction: &[f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnOnce(&[Dual]) -> Vec<Dual>,
{
    assert_eq!(
        x.len(),
        direction.len(),
        "direction must have one entry per input"
    );
    let inputs: Vec<Dual> = x
        .iter()
        .zip(direction)
        .map(|(&v, &d)| Dual::with_tangent(v, d))
        .collect();
    let outputs = f(&inputs);
    let primals = outputs.iter().map(|o| o.value).collect();
    let tangents = outputs.iter().map(|o| o.tangent).collect();
    (primals, tangents)
}

/// Evaluates the scalar-output program `f` at `x`, recording a tape, then
/// back-propagates once. Returns the output value and the full gradient
/// `d(output)/d(x_i)`.
///
/// ```
/// use autodiff::{reverse_gradient, Scalar};
///
/// // f(x, y) = x²·y at (3, 4): ∇f = (2xy, x²)
/// let (value, grad) = reverse_gradient(|_, v| v[0] * v[0] * v[1], &[3.0, 4.0]);
/// assert_eq!(value, 36.0);
/// assert_eq!(grad, vec![24.0, 9.0]);
/// ```
///
/// The single-output contract is enforced by the signature; call once per
/// output to assemble a Jacobian row by row, or use [`jacobian_reverse`].
pub fn reverse_gradient<F>(f: F, x: &[f64]) -> (f64, Vec<f64>)
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::new();
    let inputs: Vec<Var<'_>> = x.iter().map(|&v| tape.input(v)).collect();
    let output = f(&tape, &inputs);
    let adjoints = tape.backward(output);
    let grad = inputs.iter().map(|v| adjoints.get(*v)).collect();
    (output.value(), grad)
}

/// Assembles the Jacobian of a vector program column by column using forward
/// mode: one pass per input coordinate. Entry `[i][j]` is `d(out_i)/d(x_j)`.
pub fn jacobian_forward<F>(f: F, x: &[f64]) -> Vec<Vec<f64>>
where
    F: Fn(&[Dual]) -> Vec<Dual>,
{
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for j in 0..x.len() {
        let mut direction = vec![0.0; x.len()];
        direction[j] = 1.0;
        let (_, column) = forward_directional(&f, x, &direction);
        if rows.is_empty() {
            rows = vec![vec![0.0; x.len()]; column.len()];
        }
        for (i, d) in column.into_iter().enumerate() {
            rows[i][j] = d;
        }
    }
    rows
}

/// Assembles the Jacobian row by row using reverse mode: the program is
/// recorded once and back-propagated once per output.
pub fn jacobian_reverse<F>(f: F, x: &[f64]) -> Vec<Vec<f64>>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Vec<Var<'t>>,
{
    let tape = Tape::new();
    let inputs: Vec<Var<'_>> = x.iter().map(|&v| tape.input(v)).collect();
    let outputs = f(&tape, &inputs);
    outputs
        .into_iter()
        .map(|out| {
            let adjoints = tape.backward(out);
            inputs.iter().map(|v| adjoints.get(*v)).collect()
        })
        .collect()
}
