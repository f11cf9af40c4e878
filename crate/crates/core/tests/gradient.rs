use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use railframe::exec::Execution;
use railframe::policy::{batch_gradient, loss_masked_l1, Mlp, TrainingSet};

/// Independent forward pass written directly from the layer definition.
fn reference_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
    let mut act = x.to_vec();
    for (i, layer) in net.layers.iter().enumerate() {
        let mut out = Vec::with_capacity(layer.outputs);
        for o in 0..layer.outputs {
            let mut z = layer.bias[o];
            for k in 0..layer.inputs {
                z += layer.weights[o * layer.inputs + k] * act[k];
            }
            out.push(if i + 1 < net.layers.len() { z.tanh() } else { z });
        }
        act = out;
    }
    act
}

/// Targets kept well away from the prediction so the L1 loss is smooth
/// around the evaluation point.
fn far_target(pred: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    pred.iter()
        .map(|p| p + if rng.random::<bool>() { 1.0 } else { -1.0 } * rng.random_range(0.5..1.5))
        .collect()
}

#[test]
fn forward_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let net = Mlp::new(&[12, 32, 32, 20], &mut rng);
    for _ in 0..20 {
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(-2.0..2.0)).collect();
        let a = net.forward(&x).unwrap();
        let b = reference_forward(&net, &x);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() <= 1e-12, "{u} vs {v}");
        }
    }
}

#[test]
fn backward_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut net = Mlp::new(&[6, 10, 10, 8], &mut rng);
    let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target = far_target(&net.forward(&x).unwrap(), &mut rng);
    let mask = [true, true, false, true];
    let (_, grad) = net.backward(&x, &target, &mask).unwrap();
    let analytic: Vec<f64> = grad.params().copied().collect();
    let h = 1e-5;
    let n = net.num_params();
    for i in 0..n {
        let orig = *net.params_mut().nth(i).unwrap();
        *net.params_mut().nth(i).unwrap() = orig + h;
        let up = loss_masked_l1(&reference_forward(&net, &x), &target, &mask).unwrap();
        *net.params_mut().nth(i).unwrap() = orig - h;
        let down = loss_masked_l1(&reference_forward(&net, &x), &target, &mask).unwrap();
        *net.params_mut().nth(i).unwrap() = orig;
        let numeric = (up - down) / (2.0 * h);
        let scale = analytic[i].abs().max(numeric.abs()).max(1e-8);
        assert!(
            (analytic[i] - numeric).abs() / scale <= 1e-4,
            "param {i}: analytic {} numeric {numeric}",
            analytic[i]
        );
    }
}

#[test]
fn masked_rows_get_no_gradient_at_the_output() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let net = Mlp::new(&[3, 4, 6], &mut rng);
    let x = [0.3, -0.2, 0.9];
    let target = far_target(&net.forward(&x).unwrap(), &mut rng);
    let (_, grad) = net.backward(&x, &target, &[true, false]).unwrap();
    let out = grad.layers.last().unwrap();
    assert!(out.bias[3..].iter().all(|g| *g == 0.0));
    assert!(out.weights[3 * 4..].iter().all(|g| *g == 0.0));
}

#[test]
fn batch_gradient_is_the_mean_of_sample_gradients() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = Mlp::new(&[4, 8, 6], &mut rng);
    let mut set = TrainingSet {
        inputs: vec![],
        targets: vec![],
        masks: vec![],
    };
    for i in 0..19 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        set.targets.push(far_target(&net.forward(&x).unwrap(), &mut rng));
        set.inputs.push(x);
        set.masks.push(vec![true, i % 3 != 0]);
    }
    let idx: Vec<usize> = (0..19).rev().collect();
    let (loss, grad) = batch_gradient(&net, &set, &idx, Execution::Parallel).unwrap();
    let (seq_loss, seq_grad) = batch_gradient(&net, &set, &idx, Execution::Sequential).unwrap();
    assert_eq!(loss.to_bits(), seq_loss.to_bits());
    assert_eq!(grad, seq_grad);

    let mut expect = net.zeros_like();
    let mut expect_loss = 0.0;
    for &i in &idx {
        let (l, g) = net.backward(&set.inputs[i], &set.targets[i], &set.masks[i]).unwrap();
        expect_loss += l / idx.len() as f64;
        expect.add_scaled(&g, 1.0 / idx.len() as f64);
    }
    assert!((loss - expect_loss).abs() <= 1e-12);
    for (a, b) in grad.params().zip(expect.params()) {
        assert!((a - b).abs() <= 1e-12);
    }
}
