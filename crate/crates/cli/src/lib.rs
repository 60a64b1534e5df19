//! Helpers shared by the `contextauthd` and `scenario` binaries.

/// Renders an error chain on one line, skipping causes the message above
/// already spells out.
pub fn report(err: &anyhow::Error) -> String {
    let mut out = err.to_string();
    let mut last = out.clone();
    for cause in err.chain().skip(1) {
        let text = cause.to_string();
        if !last.contains(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
        last = text;
    }
    out
}
