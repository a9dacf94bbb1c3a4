//! Antipodally symmetric polytopes in the Bloch ball.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

fn normalized(a: &Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Convex polytope given by its vertices and triangular facets.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochPolytope {
    vertices: Vec<Vec3>,
    facets: Vec<[usize; 3]>,
    inradius: f64,
    circumradius: f64,
}

impl BlochPolytope {
    /// Builds the polytope from a closed triangulated surface, checking that
    /// every triangle is a supporting plane (so the triangles are exactly
    /// the hull facets) and that the origin is interior.
    pub fn from_triangulation(vertices: Vec<Vec3>, facets: Vec<[usize; 3]>) -> Result<Self> {
        let scale = vertices.iter().map(norm).fold(0.0, f64::max);
        let mut inradius = f64::INFINITY;
        let mut oriented = Vec::with_capacity(facets.len());
        for f in facets {
            let [a, b, c] = f.map(|k| vertices[k]);
            let mut n = normalized(&cross(&sub(&b, &a), &sub(&c, &a)));
            let mut f = f;
            if dot(&n, &a) < 0.0 {
                n = [-n[0], -n[1], -n[2]];
                f.swap(1, 2);
            }
            let offset = dot(&n, &a);
            if offset <= 0.0 {
                return Err(Error::InvalidArgument("origin is not interior to the polytope"));
            }
            if vertices.iter().any(|v| dot(&n, v) > offset + 1e-12 * scale) {
                return Err(Error::InvalidArgument("triangle is not a supporting facet"));
            }
            inradius = inradius.min(offset);
            oriented.push(f);
        }
        Ok(BlochPolytope { vertices, facets: oriented, inradius, circumradius: scale })
    }

    /// Geodesic sphere: every icosahedron face split into `frequency²`
    /// triangles on a flat grid, grid points projected to the unit sphere.
    /// Vertex sets nest when the frequency doubles.
    pub fn icosphere(frequency: usize) -> Self {
        assert!(frequency >= 1, "frequency must be positive");
        let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
        let mut ico: Vec<Vec3> = Vec::new();
        for s1 in [-1.0, 1.0] {
            for s2 in [-1.0, 1.0] {
                ico.push([0.0, s1, s2 * phi]);
                ico.push([s1, s2 * phi, 0.0]);
                ico.push([s2 * phi, 0.0, s1]);
            }
        }
        // Faces: triples of mutually adjacent vertices (edge length 2).
        let adjacent = |i: usize, j: usize| libm::fabs(norm(&sub(&ico[i], &ico[j])) - 2.0) < 1e-9;
        let mut faces = Vec::new();
        for i in 0..12 {
            for j in i + 1..12 {
                for k in j + 1..12 {
                    if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                        faces.push([i, j, k]);
                    }
                }
            }
        }
        debug_assert_eq!(faces.len(), 20);

        let mut index: BTreeMap<[i64; 3], usize> = BTreeMap::new();
        let mut vertices: Vec<Vec3> = Vec::new();
        let mut id = |p: Vec3| -> usize {
            let u = normalized(&p);
            let key = u.map(|c| libm::round(c * 1e9) as i64);
            *index.entry(key).or_insert_with(|| {
                vertices.push(u);
                vertices.len() - 1
            })
        };
        let f = frequency as f64;
        let mut facets = Vec::new();
        for [a, b, c] in faces {
            let (a, b, c) = (ico[a], ico[b], ico[c]);
            let grid = |i: usize, j: usize| -> Vec3 {
                let (wi, wj) = (i as f64 / f, j as f64 / f);
                let wk = 1.0 - wi - wj;
                core::array::from_fn(|d| wi * a[d] + wj * b[d] + wk * c[d])
            };
            let mut ids = BTreeMap::new();
            for i in 0..=frequency {
                for j in 0..=frequency - i {
                    ids.insert((i, j), id(grid(i, j)));
                }
            }
            for i in 0..frequency {
                for j in 0..frequency - i {
                    facets.push([ids[&(i, j)], ids[&(i + 1, j)], ids[&(i, j + 1)]]);
                    if i + j + 2 <= frequency {
                        facets.push([ids[&(i + 1, j)], ids[&(i + 1, j + 1)], ids[&(i, j + 1)]]);
                    }
                }
            }
        }
        Self::from_triangulation(vertices, facets).expect("geodesic sphere triangulation is convex")
    }

    /// Vertices `±x, ±y, ±z`.
    pub fn octahedron() -> Self {
        let mut vertices = Vec::new();
        for d in 0..3 {
            for s in [1.0, -1.0] {
                let mut v = [0.0; 3];
                v[d] = s;
                vertices.push(v);
            }
        }
        let mut facets = Vec::new();
        for sx in [0, 1] {
            for sy in [2, 3] {
                for sz in [4, 5] {
                    facets.push([sx, sy, sz]);
                }
            }
        }
        Self::from_triangulation(vertices, facets).expect("octahedron is convex")
    }

    /// The same polytope scaled about the origin.
    pub fn scaled(&self, k: f64) -> Self {
        assert!(k > 0.0, "scale must be positive");
        BlochPolytope {
            vertices: self.vertices.iter().map(|v| v.map(|c| c * k)).collect(),
            facets: self.facets.clone(),
            inradius: self.inradius * k,
            circumradius: self.circumradius * k,
        }
    }

    /// Smallest enclosing polytope of the unit ball with the same shape.
    pub fn circumscribed(&self) -> Self {
        self.scaled(1.0 / self.inradius)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[[usize; 3]] {
        &self.facets
    }

    /// Distance from the origin to the nearest facet plane.
    pub fn inradius(&self) -> f64 {
        self.inradius
    }

    pub fn circumradius(&self) -> f64 {
        self.circumradius
    }

    /// Whether `p` lies in the polytope, up to `tol`.
    pub fn contains(&self, p: &Vec3, tol: f64) -> bool {
        self.facets.iter().all(|f| {
            let [a, b, c] = f.map(|k| self.vertices[k]);
            let n = normalized(&cross(&sub(&b, &a), &sub(&c, &a)));
            dot(&n, p) <= dot(&n, &a) + tol
        })
    }

    /// One unit vector from each antipodal vertex pair.
    ///
    /// # Errors
    /// If the vertex set is not antipodally symmetric.
    pub fn axes(&self) -> Result<Vec<Vec3>> {
        let tol = 1e-9 * self.circumradius;
        let positive = |v: &Vec3| {
            let lead = v.iter().copied().find(|c| libm::fabs(*c) > tol).unwrap_or(0.0);
            lead > 0.0
        };
        let mut axes = Vec::new();
        for v in &self.vertices {
            let has_antipode = self
                .vertices
                .iter()
                .any(|w| (0..3).all(|d| libm::fabs(v[d] + w[d]) <= tol));
            if !has_antipode {
                return Err(Error::InvalidArgument("vertex set is not antipodally symmetric"));
            }
            if positive(v) {
                axes.push(normalized(v));
            }
        }
        Ok(axes)
    }
}

/// Geodesic frequency used at a refinement level: `2^(level-1)`.
pub fn level_frequency(level: u32) -> Result<usize> {
    if !(1..=4).contains(&level) {
        return Err(Error::OutOfRange { name: "level", value: f64::from(level) });
    }
    Ok(1 << (level - 1))
}

/// Measurement-direction polytope of a refinement level (6, 21, 81, 321 axes).
pub fn measurement_polytope(level: u32) -> Result<BlochPolytope> {
    Ok(BlochPolytope::icosphere(level_frequency(level)?))
}

/// Frequency of the state polytopes.
pub const STATE_FREQUENCY: usize = 8;

/// Inscribed polytope of pure states (642 vertices).
pub fn inner_state_polytope() -> BlochPolytope {
    BlochPolytope::icosphere(STATE_FREQUENCY)
}

/// The inscribed polytope scaled so that it contains the Bloch ball.
pub fn outer_state_polytope() -> BlochPolytope {
    inner_state_polytope().circumscribed()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_inradii() {
        let expected = [(1, 12, 0.7947), (2, 42, 0.9342), (4, 162, 0.9822), (8, 642, 0.9955)];
        for (f, n, r) in expected {
            let p = BlochPolytope::icosphere(f);
            assert_eq!(p.vertices().len(), n);
            assert_eq!(p.facets().len(), 20 * f * f);
            assert!(libm::fabs(p.inradius() - r) < 5e-4, "frequency {f}: {}", p.inradius());
            assert_eq!(p.axes().unwrap().len(), n / 2);
        }
    }

    #[test]
    fn icosahedron_inradius_closed_form() {
        // Inradius of the unit-circumradius icosahedron: sqrt((5 + 2 sqrt 5) / 15).
        let exact = libm::sqrt((5.0 + 2.0 * libm::sqrt(5.0)) / 15.0);
        assert!(libm::fabs(BlochPolytope::icosphere(1).inradius() - exact) < 1e-12);
        let oct = BlochPolytope::octahedron();
        assert!(libm::fabs(oct.inradius() - 1.0 / libm::sqrt(3.0)) < 1e-12);
    }

    #[test]
    fn vertex_sets_nest() {
        for f in [1, 2, 4] {
            let coarse = BlochPolytope::icosphere(f);
            let fine = BlochPolytope::icosphere(2 * f);
            for v in coarse.vertices() {
                assert!(fine.vertices().iter().any(|w| (0..3).all(|d| libm::fabs(v[d] - w[d]) < 1e-12)));
            }
        }
    }

    #[test]
    fn circumscribed_contains_ball_samples() {
        let outer = BlochPolytope::icosphere(2).circumscribed();
        assert!(libm::fabs(outer.inradius() - 1.0) < 1e-12);
        for k in 0..200 {
            let t = k as f64 * 0.7;
            let z = libm::cos(k as f64 * 1.3);
            let s = libm::sqrt(1.0 - z * z);
            assert!(outer.contains(&[s * libm::cos(t), s * libm::sin(t), z], 1e-12));
        }
    }

    #[test]
    fn levels_are_validated() {
        assert!(measurement_polytope(0).is_err());
        assert!(measurement_polytope(5).is_err());
        assert_eq!(measurement_polytope(3).unwrap().axes().unwrap().len(), 81);
    }
}
