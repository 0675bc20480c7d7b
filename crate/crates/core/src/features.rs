//! Nonlinear feature lifting: each raw column passes through a fixed
//! dictionary of eight transforms. Lifted column `8j + g` holds transform `g`
//! of raw column `j`.

use nalgebra::DMatrix;

use crate::par::Exec;

/// Floor applied to `|x|` before taking the logarithm.
pub const LOG_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Identity,
    SqrtAbs,
    LogAbs,
    Square,
    Cube,
    Cos10Pi,
    Sin,
    Tanh2,
}

impl Transform {
    pub const ALL: [Transform; 8] = [
        Transform::Identity,
        Transform::SqrtAbs,
        Transform::LogAbs,
        Transform::Square,
        Transform::Cube,
        Transform::Cos10Pi,
        Transform::Sin,
        Transform::Tanh2,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::SqrtAbs => x.abs().sqrt(),
            Transform::LogAbs => x.abs().max(LOG_EPS).ln(),
            Transform::Square => x * x,
            Transform::Cube => x * x * x,
            Transform::Cos10Pi => (10.0 * std::f64::consts::PI * x).cos(),
            Transform::Sin => x.sin(),
            Transform::Tanh2 => (2.0 * x).tanh(),
        }
    }

    pub fn position(self) -> usize {
        Self::ALL.iter().position(|t| *t == self).unwrap()
    }

    /// Label for raw column name `v`.
    pub fn label(self, v: &str) -> String {
        match self {
            Transform::Identity => v.to_string(),
            Transform::SqrtAbs => format!("sqrt|{v}|"),
            Transform::LogAbs => format!("log|{v}|"),
            Transform::Square => format!("{v}^2"),
            Transform::Cube => format!("{v}^3"),
            Transform::Cos10Pi => format!("cos(10pi*{v})"),
            Transform::Sin => format!("sin({v})"),
            Transform::Tanh2 => format!("tanh(2*{v})"),
        }
    }
}

pub fn lifted_index(raw: usize, t: Transform) -> usize {
    Transform::ALL.len() * raw + t.position()
}

/// Inverse of [`lifted_index`].
pub fn source_of(lifted: usize) -> (usize, Transform) {
    let d = Transform::ALL.len();
    (lifted / d, Transform::ALL[lifted % d])
}

#[derive(Debug, Clone)]
pub struct FeatureExpansion {
    pub psi_x: DMatrix<f64>,
    /// One label per lifted column; raw columns are named `X1..Xp`.
    pub names: Vec<String>,
}

impl FeatureExpansion {
    pub fn column_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

pub fn expand_features(x: &DMatrix<f64>) -> FeatureExpansion {
    expand_features_with(x, false, Exec::default())
}

/// With `standardize`, every lifted column is centered and scaled to unit
/// variance; constant columns are left at zero.
pub fn expand_features_with(x: &DMatrix<f64>, standardize: bool, exec: Exec) -> FeatureExpansion {
    let (n, p) = x.shape();
    let d = Transform::ALL.len();
    let cols: Vec<Vec<f64>> = exec.map_range(p * d, |c| {
        let (j, t) = source_of(c);
        let mut col: Vec<f64> = x.column(j).iter().map(|v| t.apply(*v)).collect();
        if standardize && n > 0 {
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            for v in &mut col {
                *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
            }
        }
        col
    });
    let psi_x = DMatrix::from_fn(n, p * d, |i, c| cols[c][i]);
    let names = (0..p * d)
        .map(|c| {
            let (j, t) = source_of(c);
            t.label(&format!("X{}", j + 1))
        })
        .collect();
    FeatureExpansion { psi_x, names }
}
