use estranet_core::Phase;

/// Parses `START..END:MEMBERS`, where MEMBERS is a comma list of node ids and
/// inclusive `a-b` ranges.
pub fn parse_phase(s: &str) -> Result<Phase, String> {
    let (range, members) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START..END:MEMBERS, got `{s}`"))?;
    let (start, end) = range
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got `{range}`"))?;
    let num = |x: &str| x.trim().parse::<u64>().map_err(|_| format!("invalid number `{x}`"));
    let (start, end) = (num(start)?, num(end)?);
    if start >= end {
        return Err(format!("empty snapshot range {start}..{end}"));
    }
    let mut nodes = Vec::new();
    for item in members.split(',') {
        match item.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)? as usize, num(b)? as usize);
                if a > b {
                    return Err(format!("descending node range `{item}`"));
                }
                nodes.extend(a..=b);
            }
            None => nodes.push(num(item)? as usize),
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    Ok(Phase {
        snapshots: start..end,
        members: nodes,
    })
}

/// Nodes 0-9 for the first half of the snapshots, 9-19 for the rest.
pub fn default_phases(n_snapshots: u64) -> Vec<Phase> {
    let half = n_snapshots / 2;
    vec![
        Phase { snapshots: 0..half, members: (0..10).collect() },
        Phase { snapshots: half..n_snapshots, members: (9..20).collect() },
    ]
    .into_iter()
    .filter(|p| !p.snapshots.is_empty())
    .collect()
}
