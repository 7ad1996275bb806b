//! Flat-buffer tensors and the reverse-mode graph that operates on them.
//!
//! A [`Tensor`] is a shape plus a row-major `Vec<f32>`, with an optional
//! gradient buffer of the same shape. Differentiable computation happens on a
//! [`Graph`]: a tape of eagerly evaluated nodes that can be replayed in
//! reverse to accumulate gradients. Parameters live outside the graph in a
//! [`ParameterStore`] and are bound into each graph by name, so one set of
//! weights can serve many forward/backward passes.

mod conv;
mod gemm;
mod graph;
mod pool;
mod scan;

pub use graph::{Activation, Graph, NodeId, ScanMode};
pub(crate) use scan::SEGMENT_LEN;

use crate::error::{CoreError, Result};
use indexmap::IndexMap;

// ── Tensor ─────────────────────────────────────────────────────────────────

/// Dense row-major f32 tensor with an optional same-shape gradient buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f32>,
    grad: Option<Vec<f32>>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f32>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(CoreError::shapes("Tensor::new", numel, data.len()));
        }
        Ok(Tensor { shape: shape.to_vec(), data, grad: None })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let numel: usize = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![0.0; numel], grad: None }
    }

    pub fn filled(shape: &[usize], value: f32) -> Self {
        let numel: usize = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: vec![value; numel], grad: None }
    }

    pub fn scalar(value: f32) -> Self {
        Tensor { shape: vec![1], data: vec![value], grad: None }
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(usize) -> f32) -> Self {
        let numel: usize = shape.iter().product();
        Tensor { shape: shape.to_vec(), data: (0..numel).map(&mut f).collect(), grad: None }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// Whether a gradient buffer is attached.
    pub fn requires_grad(&self) -> bool {
        self.grad.is_some()
    }

    /// Attach (zero-initialized) or detach the gradient buffer.
    pub fn set_requires_grad(&mut self, yes: bool) {
        match (yes, self.grad.is_some()) {
            (true, false) => self.grad = Some(vec![0.0; self.data.len()]),
            (false, true) => self.grad = None,
            _ => {}
        }
    }

    pub fn grad(&self) -> Option<&[f32]> {
        self.grad.as_deref()
    }

    pub fn zero_grad(&mut self) {
        if let Some(g) = &mut self.grad {
            g.fill(0.0);
        }
    }

    /// Add `delta` into the gradient buffer. The buffer must exist.
    pub fn accumulate_grad(&mut self, delta: &[f32]) -> Result<()> {
        let g = self
            .grad
            .as_mut()
            .ok_or_else(|| CoreError::Contract("accumulate_grad on tensor without gradient buffer".into()))?;
        if g.len() != delta.len() {
            return Err(CoreError::shapes("accumulate_grad", g.len(), delta.len()));
        }
        for (gi, di) in g.iter_mut().zip(delta) {
            *gi += di;
        }
        Ok(())
    }

    /// Error if any stored value is NaN or infinite.
    pub fn validate_finite(&self, what: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(CoreError::NonFinite(what.to_string()))
        }
    }
}

// ── ParameterStore ─────────────────────────────────────────────────────────

/// Ordered collection of named trainable tensors.
///
/// Iteration order is insertion order and is the canonical ordering used for
/// initialization draws, optimizer state, and checkpoint layout.
#[derive(Debug, Default, Clone)]
pub struct ParameterStore {
    entries: IndexMap<String, Tensor>,
}

impl ParameterStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a parameter. Gradient tracking is always enabled for stored
    /// parameters; freezing is a per-pass choice made when binding into a
    /// graph, not a property of the store.
    pub fn insert(&mut self, name: &str, mut tensor: Tensor) -> Result<()> {
        if self.entries.contains_key(name) {
            return Err(CoreError::Contract(format!("duplicate parameter name {name:?}")));
        }
        tensor.set_requires_grad(true);
        self.entries.insert(name.to_string(), tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .get(name)
            .ok_or_else(|| CoreError::Contract(format!("unknown parameter {name:?}")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.entries
            .get_mut(name)
            .ok_or_else(|| CoreError::Contract(format!("unknown parameter {name:?}")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parameter names in insertion order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Names starting with `prefix`, in insertion order.
    pub fn names_with_prefix(&self, prefix: &str) -> Vec<String> {
        self.entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.entries.values().map(Tensor::numel).sum()
    }

    /// Total scalar parameters under a name prefix.
    pub fn scalar_count_with_prefix(&self, prefix: &str) -> usize {
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.numel())
            .sum()
    }

    pub fn zero_grads(&mut self) {
        for t in self.entries.values_mut() {
            t.zero_grad();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_new_checks_numel() {
        assert!(Tensor::new(&[2, 3], vec![0.0; 6]).is_ok());
        assert!(Tensor::new(&[2, 3], vec![0.0; 5]).is_err());
    }

    #[test]
    fn grad_buffer_lifecycle() {
        let mut t = Tensor::zeros(&[4]);
        assert!(!t.requires_grad());
        t.set_requires_grad(true);
        assert_eq!(t.grad().unwrap(), &[0.0; 4]);
        t.accumulate_grad(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        t.accumulate_grad(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.grad().unwrap(), &[2.0, 4.0, 6.0, 8.0]);
        t.zero_grad();
        assert_eq!(t.grad().unwrap(), &[0.0; 4]);
        t.set_requires_grad(false);
        assert!(t.accumulate_grad(&[0.0; 4]).is_err());
    }

    #[test]
    fn validate_finite_flags_nan_and_inf() {
        let t = Tensor::new(&[2], vec![1.0, f32::NAN]).unwrap();
        assert!(t.validate_finite("t").is_err());
        let t = Tensor::new(&[2], vec![1.0, f32::INFINITY]).unwrap();
        assert!(t.validate_finite("t").is_err());
        let t = Tensor::new(&[2], vec![1.0, -2.0]).unwrap();
        assert!(t.validate_finite("t").is_ok());
    }

    #[test]
    fn store_preserves_insertion_order() {
        let mut s = ParameterStore::new();
        s.insert("b.w", Tensor::zeros(&[2])).unwrap();
        s.insert("a.w", Tensor::zeros(&[3])).unwrap();
        s.insert("b.b", Tensor::zeros(&[1])).unwrap();
        let names: Vec<_> = s.names().collect();
        assert_eq!(names, vec!["b.w", "a.w", "b.b"]);
        assert_eq!(s.scalar_count(), 6);
        assert_eq!(s.scalar_count_with_prefix("b."), 3);
        assert!(s.insert("a.w", Tensor::zeros(&[1])).is_err());
    }
}
