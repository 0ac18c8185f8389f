//! Message documents: generate, serialize, parse back, and watch validation
//! reject a broken file.

use assignment_messages::cli::{parse_message, random_message, serialize_message, RandomParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let msg = random_message(3, &RandomParams::new(2, 4))?;
    let text = serialize_message(&msg);
    print!("{text}");
    assert_eq!(parse_message(&text)?, msg);

    let broken = text.replacen("\"lower\":", "\"lower\":5,\"x\":", 1);
    match parse_message(&broken) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    let crossing = include_str!("data/example_one.json").replace("[1,2]", "[3,4]");
    if let Err(e) = parse_message(&crossing) {
        println!("rejected: {e}");
    }
    Ok(())
}
