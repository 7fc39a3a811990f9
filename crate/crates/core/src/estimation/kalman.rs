use crate::error::{Error, Result};
use crate::estimation::wrap_angle;

/// Scalar random-walk Kalman filter (state transition 1, observation 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Kalman1D {
    x_hat: f64,
    p: f64,
    q: f64,
    r: f64,
    initialized: bool,
}

impl Kalman1D {
    /// Unseeded filter: the first measurement sets `x_hat = z`, `P = r`.
    pub fn new(q: f64, r: f64) -> Result<Self> {
        Self::check(q, r)?;
        Ok(Self {
            x_hat: 0.0,
            p: r,
            q,
            r,
            initialized: false,
        })
    }

    /// Filter with an explicit prior.
    pub fn with_state(x_hat: f64, p: f64, q: f64, r: f64) -> Result<Self> {
        Self::check(q, r)?;
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::invalid("kalman P must be >= 0"));
        }
        Ok(Self {
            x_hat,
            p,
            q,
            r,
            initialized: true,
        })
    }

    fn check(q: f64, r: f64) -> Result<()> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::invalid("kalman q must be >= 0"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("kalman r must be > 0"));
        }
        Ok(())
    }

    pub fn seed(&mut self, z: f64) {
        self.x_hat = z;
        self.p = self.r;
        self.initialized = true;
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn estimate(&self) -> f64 {
        self.x_hat
    }

    pub fn variance(&self) -> f64 {
        self.p
    }

    pub fn reset(&mut self) {
        self.initialized = false;
        self.x_hat = 0.0;
        self.p = self.r;
    }

    /// Predict + update with measurement `z`. With `angular` set the
    /// innovation and the estimate are wrapped to (-pi, pi].
    pub fn step(&mut self, z: f64, angular: bool) -> f64 {
        if !self.initialized {
            self.seed(if angular { wrap_angle(z) } else { z });
            return self.x_hat;
        }
        let p_pred = self.p + self.q;
        let gain = p_pred / (p_pred + self.r);
        let mut innovation = z - self.x_hat;
        if angular {
            innovation = wrap_angle(innovation);
        }
        self.x_hat += gain * innovation;
        if angular {
            self.x_hat = wrap_angle(self.x_hat);
        }
        self.p = ((1.0 - gain) * p_pred).max(0.0);
        self.x_hat
    }

    /// Gain the next update would use.
    pub fn next_gain(&self) -> f64 {
        let p_pred = self.p + self.q;
        p_pred / (p_pred + self.r)
    }
}
