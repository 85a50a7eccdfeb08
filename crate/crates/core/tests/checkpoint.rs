mod common;

use pgfs_core::agent::{
    load_checkpoint, read_checkpoint_meta, save_checkpoint, CheckpointError, CheckpointMeta, StepEvent, TrainConfig,
    TrainObserver, Trainer, CHECKPOINT_TAG,
};
use pgfs_core::env::{EnvConfig, StepRecord, SynthEnv};
use pgfs_core::scoring::QedScorer;

fn config() -> TrainConfig {
    TrainConfig {
        bootstrap_steps: 40,
        batch: 8,
        f_hidden: vec![16],
        pi_hidden: vec![16],
        q_hidden: vec![16, 8],
        buffer_capacity: 500,
        total_steps: 400,
        seed: 31,
        ..TrainConfig::default()
    }
}

fn env() -> SynthEnv<QedScorer> {
    SynthEnv::new(common::bundled_index(), QedScorer::new(), EnvConfig::default())
}

#[derive(Default)]
struct Log(Vec<StepRecord>);

impl TrainObserver<StepRecord> for Log {
    fn on_step(&mut self, e: &StepEvent<'_, StepRecord>) {
        self.0.push(e.info.clone());
    }
}

fn meta(env: &SynthEnv<QedScorer>) -> CheckpointMeta {
    CheckpointMeta {
        corpus_hash: env.index().corpus_hash().to_string(),
        extra: vec![("scorer".into(), "qed".into())],
        norm: None,
    }
}

#[test]
fn resume_is_bit_identical() {
    let mut env = env();
    let mut tr = Trainer::new(config(), &env).unwrap();
    tr.run(&mut env, 100, &mut ()).unwrap();
    let text = save_checkpoint(&tr, &env, &meta(&env));

    let mut straight = Log::default();
    tr.run(&mut env, 100, &mut straight).unwrap();

    let mut env2 = self::env();
    let (mut resumed, m) = load_checkpoint(&text, &env2, env2.index().corpus_hash()).unwrap();
    assert_eq!(m, meta(&env2));
    assert_eq!(resumed.step, 100);
    let mut again = Log::default();
    resumed.run(&mut env2, 100, &mut again).unwrap();

    assert_eq!(straight.0.len(), again.0.len());
    for (a, b) in straight.0.iter().zip(&again.0) {
        assert_eq!(a.reward.to_bits(), b.reward.to_bits());
        assert_eq!(a, b);
    }
    assert_eq!(tr.agent, resumed.agent);
    assert_eq!(save_checkpoint(&tr, &env, &meta(&env)), save_checkpoint(&resumed, &env2, &meta(&env2)));
}

#[test]
fn round_trip_and_damage_detection() {
    let mut env = env();
    let mut tr = Trainer::new(config(), &env).unwrap();
    tr.run(&mut env, 200, &mut ()).unwrap();
    let text = save_checkpoint(&tr, &env, &meta(&env));
    assert!(text.starts_with(CHECKPOINT_TAG));
    let hash = env.index().corpus_hash().to_string();

    let (back, _) = load_checkpoint(&text, &env, &hash).unwrap();
    assert_eq!(save_checkpoint(&back, &env, &meta(&env)), text);
    assert_eq!(read_checkpoint_meta(&text).unwrap(), meta(&env));

    // Flip one hex digit inside the body.
    let pos = text.find("net ").unwrap() + 40;
    let mut bytes = text.clone().into_bytes();
    bytes[pos] = if bytes[pos] == b'0' { b'1' } else { b'0' };
    let damaged = String::from_utf8(bytes).unwrap();
    assert!(matches!(load_checkpoint(&damaged, &env, &hash), Err(CheckpointError::Checksum)));

    let old = text.replacen(CHECKPOINT_TAG, "PGFS-CKPT-0", 1);
    assert!(matches!(load_checkpoint(&old, &env, &hash), Err(CheckpointError::Version(v)) if v == "PGFS-CKPT-0"));

    assert!(matches!(
        load_checkpoint(&text, &env, "feedface"),
        Err(CheckpointError::CorpusMismatch { .. })
    ));
}
