//! Tangent-space gradient step: a rotation on the sphere of constant norm.

use crate::error::{Error, Result};
use crate::mps::dot;
use crate::Scalar;

/// Rotate `tensor` by angle `eta` against the tangential part of `gradient`.
///
/// With `g_t = g - (<g, A> / <A, A>) A`, the update is
/// `A' = cos(eta) A - sin(eta) ||A|| g_t / ||g_t||`, so `||A'|| = ||A||`.
/// A gradient with no tangential component leaves the tensor unchanged.
pub fn tsgo_step<T: Scalar>(tensor: &[T], gradient: &[T], eta: T) -> Result<Vec<T>> {
    if tensor.len() != gradient.len() {
        return Err(Error::Shape(format!(
            "tensor has {} entries, gradient {}",
            tensor.len(),
            gradient.len()
        )));
    }
    let aa = dot(tensor, tensor);
    if !(aa > T::zero()) {
        return Err(Error::InvalidArgument("TSGO step on a zero-norm tensor".into()));
    }
    let proj = dot(gradient, tensor) / aa;
    let tangent: Vec<T> = gradient.iter().zip(tensor).map(|(&g, &a)| g - proj * a).collect();
    let tnorm = dot(&tangent, &tangent).sqrt();
    let anorm = aa.sqrt();
    // below round-off relative to the gradient, the tangent direction is noise
    let gnorm = dot(gradient, gradient).sqrt();
    if tnorm == T::zero() || tnorm <= T::eps() * T::of(16.0) * gnorm {
        return Ok(tensor.to_vec());
    }
    let (c, s) = (eta.cos(), eta.sin() * anorm / tnorm);
    let mut out: Vec<T> = tensor.iter().zip(&tangent).map(|(&a, &t)| c * a - s * t).collect();
    // cos^2 + sin^2 = 1 holds only to round-off; pin the norm exactly
    let onorm = dot(&out, &out).sqrt();
    let fix = anorm / onorm;
    out.iter_mut().for_each(|x| *x *= fix);
    Ok(out)
}
