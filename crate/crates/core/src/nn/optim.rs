use alloc::vec::Vec;

use super::params::{ParamId, ParamStore};
use crate::math::cos;
use crate::{Error, Result};

/// Cosine decay with warm restarts. Period `i` lasts
/// `period0 * period_mult^i` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub lr0: f64,
    pub lr_min: f64,
    pub period0: usize,
    pub period_mult: f64,
}

impl LrSchedule {
    pub fn new(lr0: f64, lr_min: f64, period0: usize, period_mult: f64) -> Result<Self> {
        if !(lr0 > lr_min && lr_min >= 0.0) || period0 == 0 || !(period_mult >= 1.0) {
            return Err(Error::Config(alloc::format!(
                "invalid schedule lr0={lr0} lr_min={lr_min} period0={period0} mult={period_mult}"
            )));
        }
        Ok(Self {
            lr0,
            lr_min,
            period0,
            period_mult,
        })
    }

    /// Position inside the current restart period: `(t_cur, T_i)`.
    pub fn locate(&self, t: usize) -> (f64, f64) {
        let mut period = self.period0 as f64;
        let mut t_cur = t as f64;
        if self.period_mult == 1.0 {
            return ((t % self.period0) as f64, period);
        }
        while t_cur >= period {
            t_cur -= period;
            period *= self.period_mult;
        }
        (t_cur, period)
    }

    pub fn lr(&self, t: usize) -> f64 {
        let (t_cur, period) = self.locate(t);
        let lr = self.lr_min + 0.5 * (self.lr0 - self.lr_min) * (1.0 + cos(core::f64::consts::PI * t_cur / period));
        lr.clamp(self.lr_min, self.lr0)
    }
}

/// SGD with momentum: `v <- m v - lr g`, `p <- p + v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sgd {
    pub momentum: f64,
    velocity: Vec<Vec<f64>>,
}

impl Sgd {
    pub fn new(store: &ParamStore, momentum: f64) -> Self {
        Self {
            momentum,
            velocity: store.iter().map(|p| alloc::vec![0.0; p.value.len()]).collect(),
        }
    }

    pub fn step(&mut self, store: &mut ParamStore, lr: f64) {
        for (p, v) in store.iter_mut().zip(self.velocity.iter_mut()) {
            let grad = p.grad.data();
            let value = p.value.data_mut();
            for ((x, vi), &g) in value.iter_mut().zip(v.iter_mut()).zip(grad) {
                *vi = self.momentum * *vi - lr * g;
                *x += *vi;
            }
        }
    }

    /// Updates only the listed parameters.
    pub fn step_only(&mut self, store: &mut ParamStore, lr: f64, ids: &[ParamId]) {
        for &id in ids {
            let v = &mut self.velocity[id.index()];
            for (vi, &g) in v.iter_mut().zip(store.grad(id)) {
                *vi = self.momentum * *vi - lr * g;
            }
            for (x, vi) in store.value_mut(id).iter_mut().zip(v.iter()) {
                *x += *vi;
            }
        }
    }

    /// One update at global step `t` using the scheduled rate.
    pub fn step_scheduled(&mut self, store: &mut ParamStore, schedule: &LrSchedule, t: usize) -> f64 {
        let lr = schedule.lr(t);
        self.step(store, lr);
        lr
    }
}
