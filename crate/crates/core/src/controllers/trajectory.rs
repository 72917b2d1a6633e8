use crate::controllers::ControllerError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe<T> {
    pub time: T,
    pub pose: [T; 6],
}

/// Cubic Hermite interpolation through keyframes. Interior node velocities are
/// central differences of the neighbouring keyframes; end velocities are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec<T> {
    keyframes: Vec<Keyframe<T>>,
    slopes: Vec<[T; 6]>,
}

impl<T: Scalar> TrajectorySpec<T> {
    pub fn new(keyframes: Vec<Keyframe<T>>) -> Result<Self, ControllerError> {
        if keyframes.len() < 2 {
            return Err(ControllerError::InvalidSpec(format!(
                "trajectory needs at least 2 keyframes, got {}",
                keyframes.len()
            )));
        }
        for w in keyframes.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(ControllerError::InvalidSpec(
                    "keyframe times must be strictly increasing".into(),
                ));
            }
        }
        if !keyframes
            .iter()
            .all(|k| k.time.is_finite() && k.pose.iter().all(|v| v.is_finite()))
        {
            return Err(ControllerError::InvalidSpec(
                "keyframes must be finite".into(),
            ));
        }
        let n = keyframes.len();
        let slopes = (0..n)
            .map(|i| {
                if i == 0 || i == n - 1 {
                    [T::zero(); 6]
                } else {
                    let (a, b) = (&keyframes[i - 1], &keyframes[i + 1]);
                    std::array::from_fn(|j| (b.pose[j] - a.pose[j]) / (b.time - a.time))
                }
            })
            .collect();
        Ok(Self { keyframes, slopes })
    }

    pub fn keyframes(&self) -> &[Keyframe<T>] {
        &self.keyframes
    }

    pub fn duration(&self) -> (T, T) {
        (
            self.keyframes[0].time,
            self.keyframes[self.keyframes.len() - 1].time,
        )
    }
}

/// Pose and velocity at `t`; outside the keyframe span the end pose is held with zero velocity.
pub fn trajectory_eval<T: Scalar>(spec: &TrajectorySpec<T>, t: T) -> ([T; 6], [T; 6]) {
    let k = &spec.keyframes;
    let (t0, t1) = spec.duration();
    if t <= t0 {
        return (k[0].pose, [T::zero(); 6]);
    }
    if t >= t1 {
        return (k[k.len() - 1].pose, [T::zero(); 6]);
    }
    let i = k.partition_point(|f| f.time <= t) - 1;
    let (a, b) = (&k[i], &k[i + 1]);
    let h = b.time - a.time;
    let s = (t - a.time) / h;
    let (s2, s3) = (s * s, s * s * s);
    let (two, three, six) = (T::lit(2.0), T::lit(3.0), T::lit(6.0));
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let d00 = six * s2 - six * s;
    let d10 = three * s2 - T::lit(4.0) * s + T::one();
    let d01 = -six * s2 + six * s;
    let d11 = three * s2 - two * s;
    let (ma, mb) = (&spec.slopes[i], &spec.slopes[i + 1]);
    let pose = std::array::from_fn(|j| {
        h00 * a.pose[j] + h10 * h * ma[j] + h01 * b.pose[j] + h11 * h * mb[j]
    });
    let vel = std::array::from_fn(|j| {
        (d00 * a.pose[j] + d01 * b.pose[j]) / h + d10 * ma[j] + d11 * mb[j]
    });
    (pose, vel)
}
