//! Pulls program text out of raw model output.

/// Extracts the program from a raw model response.
///
/// The last fenced code block containing `def Run():` wins. Without fences,
/// the region from the first `def Run():` through the following run of
/// blank or indented lines is taken. Returns None when no header is found.
pub fn extract_code(raw: &str) -> Option<String> {
    last_fenced_block_with_header(raw).or_else(|| plain_region(raw))
}

fn last_fenced_block_with_header(raw: &str) -> Option<String> {
    let mut best = None;
    let mut in_block = false;
    let mut current: Vec<&str> = Vec::new();
    for line in raw.lines() {
        if line.trim_start().starts_with("```") {
            if in_block {
                let body = current.join("\n");
                if body.contains("def Run():") {
                    best = Some(body);
                }
                current.clear();
            }
            in_block = !in_block;
            continue;
        }
        if in_block {
            current.push(line);
        }
    }
    if in_block {
        // Unclosed fence: treat the remainder as the block.
        let body = current.join("\n");
        if body.contains("def Run():") {
            best = Some(body);
        }
    }
    best.map(|mut b| {
        b.push('\n');
        b
    })
}

fn plain_region(raw: &str) -> Option<String> {
    let lines: Vec<&str> = raw.lines().collect();
    let (start, offset) = lines
        .iter()
        .enumerate()
        .find_map(|(i, l)| l.find("def Run():").map(|off| (i, off)))?;
    let mut taken = vec![&lines[start][offset..]];
    for line in &lines[start + 1..] {
        if line.trim().is_empty() || line.starts_with(' ') || line.starts_with('\t') {
            taken.push(line);
        } else {
            break;
        }
    }
    while taken.len() > 1 && taken.last().is_some_and(|l| l.trim().is_empty()) {
        taken.pop();
    }
    let mut text = taken.join("\n");
    text.push('\n');
    Some(text)
}
