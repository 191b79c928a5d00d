use std::time::Duration;

use ureq::Agent;

use super::{ImportError, RemoteCredentials, RemotePayload, RemoteProjectDescriptor, RemoteSource};

/// Remote source speaking `GET /projects` and `GET /projects/{id}` with a bearer key.
pub struct HttpSource {
    creds: RemoteCredentials,
    agent: Agent,
}

impl HttpSource {
    pub fn new(creds: RemoteCredentials) -> Self {
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { creds, agent }
    }

    fn get<T: serde::de::DeserializeOwned>(
        &self,
        path: &str,
        remote_id: Option<&str>,
    ) -> Result<T, ImportError> {
        let base = self.creds.endpoint.trim_end_matches('/');
        let url = format!("{base}{path}");
        let network = |reason: String| ImportError::Network {
            endpoint: self.creds.endpoint.clone(),
            reason,
        };
        let mut resp = self
            .agent
            .get(&url)
            .header(
                "Authorization",
                &format!("Bearer {}", self.creds.api_key.expose()),
            )
            .call()
            .map_err(|e| network(e.to_string()))?;
        match resp.status().as_u16() {
            200..=299 => resp
                .body_mut()
                .read_json::<T>()
                .map_err(|e| ImportError::Translation(e.to_string())),
            401 | 403 => Err(ImportError::Authentication(self.creds.endpoint.clone())),
            404 if remote_id.is_some() => Err(ImportError::UnknownProject(
                remote_id.unwrap_or_default().to_owned(),
            )),
            status => Err(network(format!("HTTP {status} from {path}"))),
        }
    }
}

impl RemoteSource for HttpSource {
    fn list_projects(&self) -> Result<Vec<RemoteProjectDescriptor>, ImportError> {
        self.get("/projects", None)
    }

    fn fetch_project(&self, remote_id: &str) -> Result<RemotePayload, ImportError> {
        self.get(&format!("/projects/{remote_id}"), Some(remote_id))
    }
}
