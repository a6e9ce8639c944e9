//! Fully symmetric quadrature rules on the reference triangle.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Quadrature rule in barycentric coordinates. Weights sum to the
/// reference-triangle area 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f(l)` over the reference triangle.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(*p))
            .sum()
    }
}

enum Orbit {
    Centroid {
        w: f64,
    },
    /// Points `(a, a, 1 - 2a)` and permutations.
    Two {
        a: f64,
        w: f64,
    },
    /// Points `(a, b, 1 - a - b)` and all six permutations.
    Six {
        a: f64,
        b: f64,
        w: f64,
    },
}

use Orbit::{Centroid, Six, Two};

// Orbit parameters solved to 40 digits and rounded.
#[allow(clippy::excessive_precision)]
const TABLE: &[(usize, &[Orbit])] = &[
    (1, &[Centroid { w: 0.5 }]),
    (
        2,
        &[Two {
            a: 0.16666666666666666667,
            w: 0.16666666666666666667,
        }],
    ),
    (
        4,
        &[
            Two {
                a: 0.44594849091596488632,
                w: 0.11169079483900573285,
            },
            Two {
                a: 0.091576213509770743460,
                w: 0.054975871827660933819,
            },
        ],
    ),
    (
        5,
        &[
            Centroid { w: 0.1125 },
            Two {
                a: 0.47014206410511508977,
                w: 0.066197076394253090369,
            },
            Two {
                a: 0.10128650732345633880,
                w: 0.062969590272413576298,
            },
        ],
    ),
    (
        6,
        &[
            Two {
                a: 0.24928674517091042129,
                w: 0.058393137863189683013,
            },
            Two {
                a: 0.063089014491502228340,
                w: 0.025422453185103408460,
            },
            Six {
                a: 0.053145049844816947353,
                b: 0.31035245103378440542,
                w: 0.041425537809186787597,
            },
        ],
    ),
    (
        8,
        &[
            Centroid {
                w: 0.072157803838893584126,
            },
            Two {
                a: 0.45929258829272315603,
                w: 0.047545817133642312397,
            },
            Two {
                a: 0.17056930775176020662,
                w: 0.051608685267359125141,
            },
            Two {
                a: 0.050547228317030975458,
                w: 0.016229248811599040155,
            },
            Six {
                a: 0.0083947774099576053372,
                b: 0.26311282963463811342,
                w: 0.013615157087217497132,
            },
        ],
    ),
    (
        10,
        &[
            Centroid {
                w: 0.045408995191376790048,
            },
            Two {
                a: 0.48557763338365737737,
                w: 0.018362978878233352359,
            },
            Two {
                a: 0.10948157548503705480,
                w: 0.022660529717763967391,
            },
            Six {
                a: 0.14170721941487995476,
                b: 0.30793983876412095017,
                w: 0.036378958422710054302,
            },
            Six {
                a: 0.025003534762686386074,
                b: 0.24667256063990269392,
                w: 0.014163621265528742418,
            },
            Six {
                a: 0.0095408154002994575802,
                b: 0.066803251012200265774,
                w: 0.0047108334818664117300,
            },
        ],
    ),
];

fn expand(degree: usize, orbits: &[Orbit]) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for o in orbits {
        match *o {
            Centroid { w } => {
                points.push([1.0 / 3.0; 3]);
                weights.push(w);
            }
            Two { a, w } => {
                let b = 1.0 - 2.0 * a;
                for p in [[a, a, b], [a, b, a], [b, a, a]] {
                    points.push(p);
                    weights.push(w);
                }
            }
            Six { a, b, w } => {
                let c = 1.0 - a - b;
                for p in [
                    [a, b, c],
                    [a, c, b],
                    [b, a, c],
                    [b, c, a],
                    [c, a, b],
                    [c, b, a],
                ] {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
    }
    QuadratureRule {
        points,
        weights,
        exact_degree: degree,
    }
}

fn rules() -> &'static [QuadratureRule] {
    static RULES: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    RULES.get_or_init(|| TABLE.iter().map(|(d, o)| expand(*d, o)).collect())
}

/// Smallest tabulated rule integrating polynomials of total degree
/// `exact_degree` exactly.
pub fn rule(exact_degree: usize) -> Result<&'static QuadratureRule> {
    if !(1..=10).contains(&exact_degree) {
        return Err(Error::InvalidArgument(format!(
            "quadrature degree {exact_degree} outside 1..=10"
        )));
    }
    Ok(rules()
        .iter()
        .find(|r| r.exact_degree >= exact_degree)
        .expect("degree 10 tabulated"))
}

/// Exact integral of `xi^a eta^b` over the reference triangle.
pub fn monomial_integral(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    fact(a) * fact(b) / fact(a + b + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_rule() {
        let r = rule(1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r.weights[0], 0.5);
    }

    #[test]
    fn weights_sum_to_half_and_points_inside() {
        for d in 1..=10 {
            let r = rule(d).unwrap();
            assert!(r.exact_degree >= d);
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
            for p in &r.points {
                assert!(p.iter().all(|&c| c > 0.0 && c < 1.0));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degree_six_monomial() {
        let r = rule(6).unwrap();
        let q = r.integrate(|l| l[1].powi(3) * l[2].powi(2));
        assert!((q - 12.0 / 5040.0).abs() < 1e-16);
    }

    #[test]
    fn exact_on_all_monomials() {
        for d in 1..=10 {
            let r = rule(d).unwrap();
            for a in 0..=r.exact_degree as u32 {
                for b in 0..=(r.exact_degree as u32 - a) {
                    let q = r.integrate(|l| l[1].powi(a as i32) * l[2].powi(b as i32));
                    let e = monomial_integral(a, b);
                    assert!(
                        ((q - e) / e).abs() < 1e-13,
                        "deg {d} monomial {a},{b}: {q} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn out_of_range() {
        assert!(rule(0).is_err());
        assert!(rule(11).is_err());
    }
}
