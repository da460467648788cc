use super::network::{Activations, Gradients, QNetwork};
use super::LearnerError;

/// One transition in dense form, as fed to [`td_update`].
#[derive(Debug, Clone, Copy)]
pub struct TdSample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub reward: f64,
    pub next_state: &'a [f64],
    pub terminal: bool,
}

/// Bellman targets `r + gamma * max_a' Q(s', a')` (just `r` for terminal
/// samples), with the max taken on `bootstrap`.
pub fn bellman_targets(
    bootstrap: &QNetwork,
    batch: &[TdSample<'_>],
    gamma: f64,
) -> Result<Vec<f64>, LearnerError> {
    let mut acts = Activations::default();
    batch
        .iter()
        .map(|s| {
            if s.terminal {
                return Ok(s.reward);
            }
            bootstrap.forward_cached(s.next_state, &mut acts)?;
            let best = acts
                .output()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(s.reward + gamma * best)
        })
        .collect()
}

/// Mean squared Bellman residual against fixed `targets` and its gradient.
pub fn td_loss_and_gradient(
    net: &QNetwork,
    batch: &[TdSample<'_>],
    targets: &[f64],
) -> Result<(f64, Gradients), LearnerError> {
    if batch.is_empty() {
        return Err(LearnerError::EmptyBatch);
    }
    let n = batch.len() as f64;
    let mut grads = net.zero_gradients();
    let mut acts = Activations::default();
    let mut loss = 0.0;
    let mut out_grad = vec![0.0; net.output_dim()];
    for (s, &target) in batch.iter().zip(targets) {
        if s.action >= net.output_dim() {
            return Err(LearnerError::ShapeMismatch {
                expected: net.output_dim(),
                got: s.action + 1,
            });
        }
        net.forward_cached(s.state, &mut acts)?;
        let residual = target - acts.output()[s.action];
        loss += residual * residual;
        out_grad.iter_mut().for_each(|g| *g = 0.0);
        out_grad[s.action] = -2.0 * residual / n;
        net.backward(&acts, &out_grad, &mut grads);
    }
    Ok((loss / n, grads))
}

/// One gradient-descent step on the mean squared Bellman residual of
/// `batch`. Targets come from `bootstrap` when given (a frozen copy),
/// otherwise from `net` itself before the step, and are held constant.
/// Returns the loss before the step.
pub fn td_update(
    net: &mut QNetwork,
    bootstrap: Option<&QNetwork>,
    batch: &[TdSample<'_>],
    gamma: f64,
    learning_rate: f64,
) -> Result<f64, LearnerError> {
    if batch.is_empty() {
        return Err(LearnerError::EmptyBatch);
    }
    let targets = bellman_targets(bootstrap.unwrap_or(net), batch, gamma)?;
    let (loss, grads) = td_loss_and_gradient(net, batch, &targets)?;
    net.apply_gradients(&grads, learning_rate);
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_hot(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn single_step_matches_tabular_rule() {
        // one state, lookup-table net: dQ = 2 * lr * residual, so lr = 0.05 is alpha = 0.1
        let mut net = QNetwork::zeros(&[1, 2]).unwrap().without_bias();
        let s = one_hot(1, 0);
        let sample = TdSample {
            state: &s,
            action: 0,
            reward: 1.0,
            next_state: &s,
            terminal: false,
        };
        let loss = td_update(&mut net, None, &[sample], 0.99, 0.05).unwrap();
        assert_eq!(loss, 1.0);
        let q = net.forward(&s).unwrap();
        assert!((q[0] - 0.1).abs() < 1e-15);
        assert_eq!(q[1], 0.0);
    }

    #[test]
    fn terminal_zero_reward_is_fixed_point() {
        let mut net = QNetwork::zeros(&[3, 4, 2]).unwrap();
        net.weights_mut(0)[1] = 0.3;
        let before = net.clone();
        let s = vec![0.0, 1.0, 0.0];
        let batch = [TdSample {
            state: &s,
            action: 1,
            reward: 0.0,
            next_state: &s,
            terminal: true,
        }; 4];
        let loss = td_update(&mut net, None, &batch, 0.9, 0.5).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(net, before);
    }

    #[test]
    fn empty_batch_rejected() {
        let mut net = QNetwork::zeros(&[1, 2]).unwrap();
        assert_eq!(
            td_update(&mut net, None, &[], 0.9, 0.1),
            Err(LearnerError::EmptyBatch)
        );
    }

    #[test]
    fn frozen_bootstrap_supplies_the_max() {
        let net = QNetwork::zeros(&[1, 2]).unwrap().without_bias();
        let mut frozen = net.clone();
        frozen.weights_mut(0)[1] = 10.0;
        let s = vec![1.0];
        let sample = TdSample {
            state: &s,
            action: 0,
            reward: 1.0,
            next_state: &s,
            terminal: false,
        };
        let t = bellman_targets(&frozen, &[sample], 0.5).unwrap();
        assert_eq!(t, vec![6.0]);
        let t = bellman_targets(&net, &[sample], 0.5).unwrap();
        assert_eq!(t, vec![1.0]);
    }
}
