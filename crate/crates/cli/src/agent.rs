//! The agent a batch or REPL session talks to.

use clauseroute::agentio::{
    query_agent, Behavior, EndpointConfig, HttpTransport, PromptTemplate, RetryPolicy, Simulator,
};
use clauseroute::prior::{PredicateLibrary, PriorModel};
use clauseroute::zoo::Endpoint;
use rand_chacha::ChaCha8Rng;

use crate::args::{AgentArgs, AgentKind};
use crate::{CliError, Context};

pub enum AgentRunner<'c> {
    Simulated {
        sim: Simulator<'c>,
        behavior: Behavior,
        tag: String,
    },
    Live {
        ctx: &'c Context,
        transport: HttpTransport,
        policy: RetryPolicy,
        template: PromptTemplate,
        tag: String,
    },
}

/// Reads `intercept <b>` and `<predicate> <w>` lines; anything else is
/// ignored, so a fit-prior report can be fed back in.
pub fn parse_prior(text: &str, lib: &PredicateLibrary) -> Result<PriorModel<f64>, CliError> {
    let mut intercept = None;
    let mut weights = vec![0.0; lib.len()];
    let mut seen = vec![false; lib.len()];
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        let slot = if name == "intercept" {
            None
        } else if let Some(j) = lib.index_of(name) {
            Some(j)
        } else {
            continue;
        };
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::Usage(format!("prior: `{value}` for {name} is not a number")))?;
        match slot {
            None if intercept.is_none() => intercept = Some(value),
            Some(j) if !seen[j] => {
                weights[j] = value;
                seen[j] = true;
            }
            _ => {}
        }
    }
    let intercept = intercept.ok_or_else(|| CliError::Usage("prior: no `intercept` line".to_string()))?;
    let names = lib.names().into_iter().map(String::from).collect();
    Ok(PriorModel::planted(intercept, weights, names))
}

impl<'c> AgentRunner<'c> {
    pub fn build(ctx: &'c Context, args: &AgentArgs) -> Result<Self, CliError> {
        if args.agent == AgentKind::Live {
            let path = args
                .endpoint
                .as_deref()
                .ok_or_else(|| CliError::Usage("--agent live needs --endpoint <config.toml>".to_string()))?;
            let config = EndpointConfig::from_path(path)?;
            let template = match &args.template {
                Some(p) => PromptTemplate::from_path(p)?,
                None => PromptTemplate::default(),
            };
            return Ok(AgentRunner::Live {
                ctx,
                transport: HttpTransport::new(&config)?,
                policy: config.retry_policy(),
                template,
                tag: format!("live:{}", config.model),
            });
        }
        let sim = Simulator::new(&ctx.zoo, ctx.compiler.clone(), args.mode.into())?;
        let (behavior, tag) = match args.agent {
            AgentKind::Oracle => (Behavior::Oracle, "oracle".to_string()),
            AgentKind::Noisy => (Behavior::Noisy(args.flip), format!("noisy:{}", args.flip)),
            AgentKind::Prior => {
                let path = args
                    .prior
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--agent prior needs --prior <file>".to_string()))?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                (Behavior::Prior(parse_prior(&text, sim.library())?), "prior".to_string())
            }
            AgentKind::Live => unreachable!("handled above"),
        };
        sim.validate(&behavior)?;
        Ok(AgentRunner::Simulated { sim, behavior, tag })
    }

    pub fn tag(&self) -> &str {
        match self {
            AgentRunner::Simulated { tag, .. } | AgentRunner::Live { tag, .. } => tag,
        }
    }

    /// The agent's raw reply for one interaction.
    pub fn reply(
        &self,
        current: Option<&Endpoint>,
        prompt: &str,
        key: &str,
        rng: &mut ChaCha8Rng,
    ) -> Result<String, CliError> {
        match self {
            AgentRunner::Simulated { sim, behavior, .. } => Ok(sim.simulate(current, key, behavior, rng)?),
            AgentRunner::Live {
                ctx,
                transport,
                policy,
                template,
                ..
            } => {
                let req = template.render(&ctx.zoo, current, prompt, key);
                let reply = query_agent(&req, transport, policy, &mut std::thread::sleep)?;
                Ok(reply.text)
            }
        }
    }
}
