//! Run the acceptance criteria and print the table.

use biharm::verify::{report_table, run_all};

fn main() {
    let reports = run_all();
    print!("{}", report_table(&reports));
}
