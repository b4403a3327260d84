use cxxbmc_core::symex::SymexConfig;
use cxxbmc_testkit::{gen, oracle};

fn agree(cfg: SymexConfig) {
    let mut violated = 0;
    for seed in 0..200 {
        let src = gen::program(seed);
        match oracle::equivalence(&src, cfg) {
            Ok(n) => violated += n,
            Err(e) => panic!("seed {seed}: {e}\n{src}"),
        }
    }
    assert!(violated > 50, "only {violated} violations");
}

#[test]
fn generated_programs_agree() {
    agree(SymexConfig::default());
}

#[test]
fn generated_programs_agree_without_propagation() {
    agree(SymexConfig {
        propagate: false,
        ..SymexConfig::default()
    });
}
