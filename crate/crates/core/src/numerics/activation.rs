use serde::{Deserialize, Serialize};

use super::{Matrix, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
}

/// Logistic function, evaluated without overflow for large `|x|`.
pub fn sigmoid(x: Real) -> Real {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn relu(x: Real) -> Real {
    x.max(0.0)
}

impl Activation {
    pub fn eval(self, x: Real) -> Real {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Tanh => x.tanh(),
            Activation::Relu => relu(x),
        }
    }
}

pub fn apply_activation(m: &Matrix, kind: Activation) -> Matrix {
    m.map(|x| kind.eval(x))
}
