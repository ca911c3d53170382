//! Write a dataset in LIBSVM format, read it back, split it.

use ssag::data::{load_libsvm, split_train_test, synthetic::separable_2d, write_libsvm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("ssag-libsvm-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("toy.libsvm");

    write_libsvm(&separable_2d(50, 0.3, 1)?, &path)?;
    let text = std::fs::read_to_string(&path)?;
    println!("first lines of {}:", path.display());
    text.lines().take(3).for_each(|l| println!("  {l}"));

    let data = load_libsvm(&path, None)?;
    let (train, test) = split_train_test(&data, 0.8, 0)?;
    println!("{} samples, {} features; train {}, test {}", data.n_samples(), data.n_features, train.n_samples(), test.n_samples());

    std::fs::write(&path, "+1 1:0.5 3:x\n")?;
    println!("malformed file: {}", load_libsvm(&path, None).unwrap_err());
    Ok(())
}
