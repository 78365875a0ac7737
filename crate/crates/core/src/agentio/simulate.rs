//! Local stand-ins for the routing agent.

use rand::Rng;

use crate::dirkey::{Compiler, Mode};
use crate::postcond::render_bits;
use crate::prior::{build_library, PredicateLibrary, PriorError, PriorModel};
use crate::solver::{build_instance, solve};
use crate::zoo::{Endpoint, Zoo};

use super::AgentError;

#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    /// Compiles the key, solves exactly and prints the selection.
    Oracle,
    /// Ignores the key; includes endpoint `m` with probability
    /// `sigmoid(b + sum_j w_j psi_j(m))` over the predicate library.
    Prior(PriorModel<f64>),
    /// Oracle output with every bit flipped with this probability.
    Noisy(f64),
}

/// Agent simulator bound to one zoo.
pub struct Simulator<'z> {
    zoo: &'z Zoo,
    compiler: Compiler,
    mode: Mode,
    library: PredicateLibrary,
}

impl<'z> Simulator<'z> {
    pub fn new(zoo: &'z Zoo, compiler: Compiler, mode: Mode) -> Result<Self, PriorError> {
        Ok(Simulator {
            library: build_library(zoo)?,
            zoo,
            compiler,
            mode,
        })
    }

    pub fn library(&self) -> &PredicateLibrary {
        &self.library
    }

    /// The exact selection for `key`, or `None` when the key does not
    /// compile.
    pub fn oracle_bits(&self, current: Option<&Endpoint>, key: &str) -> Option<Vec<bool>> {
        let key = self.compiler.classify(key);
        let cs = self.compiler.compile::<f64>(&key, self.zoo, self.mode).ok()?;
        let inst = build_instance(&cs, self.zoo, current).ok()?;
        Some(solve(&inst).chosen)
    }

    pub fn validate(&self, behavior: &Behavior) -> Result<(), AgentError> {
        match behavior {
            Behavior::Oracle => Ok(()),
            Behavior::Noisy(p) if (0.0..=1.0).contains(p) => Ok(()),
            Behavior::Noisy(p) => Err(AgentError::Config(format!("flip probability {p} outside [0, 1]"))),
            Behavior::Prior(model) if model.weights.len() != self.library.len() => Err(AgentError::Config(format!(
                "prior has {} weights, library has {} predicates",
                model.weights.len(),
                self.library.len()
            ))),
            Behavior::Prior(model) if model.weights.iter().any(|w| !w.is_finite()) || model.intercept.is_nan() => {
                Err(AgentError::Config("prior parameters must be finite".to_string()))
            }
            Behavior::Prior(_) => Ok(()),
        }
    }

    /// A reply in the `M` space-separated integers format. Under the oracle
    /// an unrecognized key yields a deliberately malformed reply.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        current: Option<&Endpoint>,
        key: &str,
        behavior: &Behavior,
        rng: &mut R,
    ) -> Result<String, AgentError> {
        self.validate(behavior)?;
        let bits = match behavior {
            Behavior::Prior(model) => model
                .probabilities(&self.library)
                .into_iter()
                .map(|p| rng.random::<f64>() < p)
                .collect(),
            Behavior::Oracle | Behavior::Noisy(_) => {
                let Some(mut bits) = self.oracle_bits(current, key) else {
                    return Ok(malformed_reply(key));
                };
                if let Behavior::Noisy(flip) = behavior {
                    for b in &mut bits {
                        if rng.random::<f64>() < *flip {
                            *b = !*b;
                        }
                    }
                }
                bits
            }
        };
        Ok(render_bits(&bits))
    }
}

/// What the oracle says when it cannot route.
pub fn malformed_reply(key: &str) -> String {
    format!("Sorry, I cannot interpret the direction {key:?}.")
}

/// One-shot simulation with the bundled compiler config.
pub fn simulate_agent<R: Rng + ?Sized>(
    zoo: &Zoo,
    current: Option<&Endpoint>,
    key: &str,
    behavior: &Behavior,
    mode: Mode,
    rng: &mut R,
) -> Result<String, AgentError> {
    let sim = Simulator::new(zoo, Compiler::default(), mode).map_err(|e| AgentError::Config(e.to_string()))?;
    sim.simulate(current, key, behavior, rng)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::postcond::{classify, process_mask, Label};
    use crate::zoo::bundled_zoo;

    #[test]
    fn oracle_completeness_matches_price_scan() {
        let zoo = bundled_zoo();
        let gpt4 = zoo.find("GPT-4").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let key = "I want a model with cheaper output prices.";
        let reply = simulate_agent(&zoo, Some(gpt4), key, &Behavior::Oracle, Mode::Completeness, &mut rng).unwrap();
        let mask = process_mask(&reply, zoo.len());
        assert!(!mask.fail_flag);
        let price = |ep: &Endpoint| zoo.value(ep, "Output Price").unwrap().as_f64();
        let expected: Vec<bool> = zoo
            .endpoints()
            .iter()
            .map(|ep| matches!((price(ep), price(gpt4)), (Some(a), Some(b)) if a < b))
            .collect();
        assert_eq!(mask.bits, expected);
    }

    #[test]
    fn prior_with_infinite_intercept_selects_all() {
        let zoo = bundled_zoo();
        let sim = Simulator::new(&zoo, Compiler::default(), Mode::Shortlist).unwrap();
        let j = sim.library().len();
        let model = PriorModel::planted(f64::INFINITY, vec![0.0; j], vec![String::new(); j]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reply = sim.simulate(None, "NONE", &Behavior::Prior(model), &mut rng).unwrap();
        assert_eq!(classify(&process_mask(&reply, zoo.len())).label, Label::All);
    }

    #[test]
    fn zero_noise_is_the_oracle() {
        let zoo = bundled_zoo();
        let sim = Simulator::new(&zoo, Compiler::default(), Mode::Shortlist).unwrap();
        let cur = zoo.find("o4-mini");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for key in ["I want a cheaper model.", "I want a model with cheaper cached input.", "NONE"] {
            assert_eq!(
                sim.simulate(cur, key, &Behavior::Oracle, &mut rng).unwrap(),
                sim.simulate(cur, key, &Behavior::Noisy(0.0), &mut rng).unwrap()
            );
        }
    }

    #[test]
    fn unrecognized_key_gives_failed_reply() {
        let zoo = bundled_zoo();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let reply = simulate_agent(&zoo, None, "make it purple", &Behavior::Oracle, Mode::Shortlist, &mut rng).unwrap();
        let mask = process_mask(&reply, zoo.len());
        assert!(mask.fail_flag);
        assert_eq!(classify(&mask).label, Label::Zero);
    }

    #[test]
    fn invalid_behaviors_rejected() {
        let zoo = bundled_zoo();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let noisy = simulate_agent(&zoo, None, "NONE", &Behavior::Noisy(1.5), Mode::Shortlist, &mut rng);
        assert!(matches!(noisy, Err(AgentError::Config(_))));
        let short = PriorModel::planted(0.0, vec![1.0], vec!["x".into()]);
        let prior = simulate_agent(&zoo, None, "NONE", &Behavior::Prior(short), Mode::Shortlist, &mut rng);
        assert!(matches!(prior, Err(AgentError::Config(_))));
    }
}
