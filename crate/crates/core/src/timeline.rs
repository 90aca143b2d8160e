//! Cumulative deployments: a base set followed by launches added one at a time.

use serde::{Deserialize, Serialize};

use crate::catalog::{CatalogFilter, Datacenter, DatacenterCatalog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaunchEvent {
    /// 0 for the base deployment, k for the k-th launch.
    pub step: usize,
    pub datacenter_id: Option<String>,
    pub name: Option<String>,
    pub launch_date: Option<String>,
    pub deployment_size: usize,
}

impl LaunchEvent {
    pub fn label(&self) -> String {
        match &self.datacenter_id {
            None => "base".to_string(),
            Some(id) => format!("+{id}"),
        }
    }
}

/// Base deployment (entries admitted by `base`) followed by one prefix per
/// launch. Launches must be in ascending launch-date order; a launch already
/// present in the deployment still yields a step but does not change it.
pub fn deployment_steps<'a>(
    catalog: &'a DatacenterCatalog,
    base: &CatalogFilter,
    launches: &[String],
) -> Result<Vec<(LaunchEvent, Vec<&'a Datacenter>)>> {
    let resolved = launches
        .iter()
        .map(|id| catalog.get(id).ok_or_else(|| Error::UnknownDatacenter(id.clone())))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = resolved.windows(2).find(|w| w[0].launch_date > w[1].launch_date) {
        return Err(Error::Argument(format!(
            "launches out of order: `{}` ({}) before `{}` ({})",
            w[0].id, w[0].launch_date, w[1].id, w[1].launch_date
        )));
    }

    let mut current = catalog.select(base);
    let mut steps = Vec::with_capacity(resolved.len() + 1);
    steps.push((
        LaunchEvent {
            step: 0,
            datacenter_id: None,
            name: None,
            launch_date: None,
            deployment_size: current.len(),
        },
        current.clone(),
    ));
    for (k, dc) in resolved.into_iter().enumerate() {
        if !current.iter().any(|d| d.id == dc.id) {
            current.push(dc);
        }
        steps.push((
            LaunchEvent {
                step: k + 1,
                datacenter_id: Some(dc.id.clone()),
                name: Some(dc.name.clone()),
                launch_date: Some(dc.launch_date.to_string()),
                deployment_size: current.len(),
            },
            current.clone(),
        ));
    }
    Ok(steps)
}
