//! The five zero patterns of invertible 3x3 matrices and their segment
//! partitions, with witnessing sequences for the pair (3,1).

use siegelkit::exactmat::RationalMatrix;
use siegelkit::segments::{leading_entries, segment_partition, witnessing_sequence};

fn main() -> siegelkit::Result<()> {
    let instances = [
        "1 1 1; 0 1 1; 0 0 1",
        "1 1 1; 1 1 1; 0 0 1",
        "1 1 1; 0 0 1; 0 1 0",
        "0 0 1; 0 1 0; 1 0 0",
        "1 1 1; 1 0 0; 0 1 0",
    ];
    for text in instances {
        let g = RationalMatrix::parse(text)?;
        let part = segment_partition(&g)?;
        let leading: Vec<String> = leading_entries(&g)?.iter().map(ToString::to_string).collect();
        print!("{text:<22} leading {:<18} partition {part}", leading.join(" "));
        if part.same_segment(3, 1) {
            let seq: Vec<String> = witnessing_sequence(&g, 3, 1)?.iter().map(ToString::to_string).collect();
            print!("   (3,1) via {}", seq.join(" "));
        }
        println!();
    }
    Ok(())
}
