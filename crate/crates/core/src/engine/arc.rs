use num_complex::Complex64;

use super::EngineError;

/// A polyline `γ: [0, 1] → C` parameterized by normalized chord length.
#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    vertices: Vec<Complex64>,
    /// Cumulative length at each vertex.
    cumulative: Vec<f64>,
}

impl Arc {
    pub fn new(vertices: Vec<Complex64>) -> Result<Self, EngineError> {
        if vertices.len() < 2 {
            return Err(EngineError::BadArc(format!(
                "an arc needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        let mut cumulative = vec![0.0];
        for (i, pair) in vertices.windows(2).enumerate() {
            let len = (pair[1] - pair[0]).norm();
            if !(len > 0.0 && len.is_finite()) {
                return Err(EngineError::BadArc(format!(
                    "vertices {i} and {} coincide or are not finite",
                    i + 1
                )));
            }
            cumulative.push(cumulative[i] + len);
        }
        Ok(Self {
            vertices,
            cumulative,
        })
    }

    /// The segment `[from, to]`.
    pub fn segment(from: Complex64, to: Complex64) -> Result<Self, EngineError> {
        Self::new(vec![from, to])
    }

    /// Regular `n`-gon inscribed in the circle, closed (first vertex repeated).
    pub fn circle(center: Complex64, radius: f64, n: usize) -> Result<Self, EngineError> {
        let n = n.max(3);
        let mut v: Vec<Complex64> = (0..n)
            .map(|k| center + Complex64::from_polar(radius, std::f64::consts::TAU * k as f64 / n as f64))
            .collect();
        v.push(v[0]);
        Self::new(v)
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn start(&self) -> Complex64 {
        self.vertices[0]
    }

    pub fn end(&self) -> Complex64 {
        *self.vertices.last().unwrap()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-12 * (1.0 + self.start().norm())
    }

    /// Parameter of vertex `i`.
    pub fn vertex_t(&self, i: usize) -> f64 {
        if i + 1 == self.vertices.len() {
            1.0
        } else {
            self.cumulative[i] / self.length()
        }
    }

    /// Index of the segment containing `t` (the later one at a vertex).
    fn segment_index(&self, t: f64) -> usize {
        let s = t.clamp(0.0, 1.0) * self.length();
        let idx = self.cumulative.partition_point(|&c| c <= s);
        idx.saturating_sub(1).min(self.vertices.len() - 2)
    }

    pub fn point_at(&self, t: f64) -> Complex64 {
        if t >= 1.0 {
            return self.end();
        }
        if t <= 0.0 {
            return self.start();
        }
        let i = self.segment_index(t);
        let s = t * self.length();
        let frac = (s - self.cumulative[i]) / (self.cumulative[i + 1] - self.cumulative[i]);
        self.vertices[i] + (self.vertices[i + 1] - self.vertices[i]) * frac
    }

    /// Parameter of the first vertex strictly after `t`.
    pub fn next_vertex_t(&self, t: f64) -> f64 {
        self.vertex_t(self.segment_index(t) + 1)
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        Self::new(v).expect("reversal keeps vertices distinct")
    }

    /// Distance from `z` to the polyline.
    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.vertices
            .windows(2)
            .map(|p| {
                let d = p[1] - p[0];
                let s = ((z - p[0]) * d.conj()).re / d.norm_sqr();
                (z - (p[0] + d * s.clamp(0.0, 1.0))).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}
