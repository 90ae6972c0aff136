use std::str::FromStr;

use qgan_core::search::LinearMock;

/// `--mock` value: comma-separated slopes suffixed `d` and `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MockSpec(pub LinearMock);

impl FromStr for MockSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (mut d, mut g) = (None, None);
        for part in s.split(',') {
            let part = part.trim();
            let (num, slot) = if let Some(n) = part.strip_suffix('d') {
                (n, &mut d)
            } else if let Some(n) = part.strip_suffix('g') {
                (n, &mut g)
            } else {
                return Err(format!("mock term `{part}` must end in `d` or `g`"));
            };
            let v: f64 = num.parse().map_err(|_| format!("bad slope `{num}`"))?;
            if !(v >= 0.0 && v.is_finite()) || slot.replace(v).is_some() {
                return Err(format!("bad or repeated mock term `{part}`"));
            }
        }
        match (d, g) {
            (Some(d_slope), Some(g_slope)) => Ok(MockSpec(LinearMock { d_slope, g_slope })),
            _ => Err("mock needs both a `d` and a `g` slope, e.g. 0.3d,0.25g".into()),
        }
    }
}
