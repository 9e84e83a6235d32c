//! Row-major tensors over joint pure-action profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on exact enumeration of joint action spaces.
pub const ENUMERATION_CAP: u128 = 10_000_000;

/// Dense tensor indexed by a joint action, last player fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl JointTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let size = joint_size(&dims)?;
        if values.len() as u128 != size {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} values for joint size {}",
                values.len(),
                size
            )));
        }
        Ok(JointTensor { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let size = joint_size(&dims)? as usize;
        Ok(JointTensor {
            dims,
            values: vec![0.0; size],
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn flat_index(&self, joint: &[usize]) -> usize {
        flat_index(&self.dims, joint)
    }

    pub fn get(&self, joint: &[usize]) -> f64 {
        self.values[self.flat_index(joint)]
    }

    pub fn set(&mut self, joint: &[usize], v: f64) {
        let idx = self.flat_index(joint);
        self.values[idx] = v;
    }
}

/// Product of dims, guarded against the enumeration cap.
pub fn joint_size(dims: &[usize]) -> Result<u128> {
    let mut size: u128 = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::ShapeMismatch("zero-size action set".to_string()));
        }
        size = size.saturating_mul(d as u128);
        if size > ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge {
                size,
                cap: ENUMERATION_CAP,
            });
        }
    }
    Ok(size)
}

pub fn flat_index(dims: &[usize], joint: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), joint.len());
    let mut idx = 0;
    for (d, a) in dims.iter().zip(joint) {
        idx = idx * d + a;
    }
    idx
}

pub fn unflatten(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut joint = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        joint[i] = flat % dims[i];
        flat /= dims[i];
    }
    joint
}

/// Iterates all joint actions in flat order, yielding the multi-index.
pub struct JointIter {
    dims: Vec<usize>,
    current: Option<Vec<usize>>,
}

impl JointIter {
    pub fn new(dims: &[usize]) -> Self {
        let start = if dims.iter().all(|&d| d > 0) {
            Some(vec![0; dims.len()])
        } else {
            None
        };
        JointIter {
            dims: dims.to_vec(),
            current: start,
        }
    }
}

impl Iterator for JointIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = self.dims.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.dims[i] {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}
