use fairscope::kendall::kendall_tau_b;

/// Tau-b with heavy ties, and the undefined case.
pub fn run_example() -> fairscope::Result<()> {
    let grade = [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0];
    let score = [10.0, 12.0, 11.0, 15.0, 15.0, 14.0, 18.0, 20.0];
    let tau = kendall_tau_b(&grade, &score).expect("both vary");
    println!("tau-b = {tau:.4}");
    match kendall_tau_b(&grade, &[1.0; 8]) {
        Ok(t) => println!("unexpected {t}"),
        Err(e) => println!("constant input: {e}"),
    }
    Ok(())
}

fn main() -> fairscope::Result<()> {
    run_example()
}
