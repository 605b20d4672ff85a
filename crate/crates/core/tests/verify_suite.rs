use fblab::verify::{run_suite, verify_suite, Mutant, Mutation};

#[test]
fn real_kernel_passes_every_check() {
    let r = verify_suite(0);
    print!("{r}");
    assert!(r.passed(), "failures: {:#?}", r.failures().collect::<Vec<_>>());
}

#[test]
fn each_mutation_is_caught() {
    for m in Mutation::ALL {
        let r = run_suite(0, &Mutant(m));
        let failed: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
        println!("{m:?}: {failed:?}");
        assert!(!failed.is_empty(), "{m:?} survived the suite");
    }
}
