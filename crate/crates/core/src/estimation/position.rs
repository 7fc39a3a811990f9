use crate::error::{Error, Result};
use crate::kinematics::{integrate_pose, Pose2D, Twist};

/// Planar position smoother: dead reckoning from the commanded twist
/// between GPS fixes, and a scalar Kalman correction per axis on each fix.
/// Both axes share the same variance since they share `q` and `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionKalman {
    xy: Option<(f64, f64)>,
    p: f64,
    /// Process noise, m^2 per second of travel time.
    q: f64,
    /// GPS variance per axis, m^2.
    r: f64,
}

impl PositionKalman {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::invalid("position q must be >= 0"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("position r must be > 0"));
        }
        Ok(Self { xy: None, p: r, q, r })
    }

    pub fn estimate(&self) -> Option<(f64, f64)> {
        self.xy
    }

    pub fn variance(&self) -> f64 {
        self.p
    }

    /// Moves the estimate along `twist` for `dt`, starting from the
    /// current estimate and the heading `theta`.
    pub fn predict(&mut self, theta: f64, twist: &Twist, dt: f64) -> Result<()> {
        let Some((x, y)) = self.xy else {
            return Ok(());
        };
        let next = integrate_pose(&Pose2D::new(x, y, theta), twist, dt)?;
        self.xy = Some((next.x, next.y));
        self.p += self.q * dt;
        Ok(())
    }

    /// The first fix seeds the estimate with variance `r`.
    pub fn update(&mut self, z: (f64, f64)) -> (f64, f64) {
        let xy = match self.xy {
            None => {
                self.p = self.r;
                z
            }
            Some((x, y)) => {
                let k = self.p / (self.p + self.r);
                self.p *= 1.0 - k;
                (x + k * (z.0 - x), y + k * (z.1 - y))
            }
        };
        self.xy = Some(xy);
        xy
    }
}
