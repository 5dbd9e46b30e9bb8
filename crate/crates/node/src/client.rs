//! Typed HTTP client for a running node.

use serde::de::DeserializeOwned;

use crate::wire::*;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("node answered {status}: {message}")]
    Api { status: u16, message: String },
}

#[derive(Debug, Clone)]
pub struct NodeClient {
    base: String,
    token: Option<String>,
    http: reqwest::Client,
}

impl NodeClient {
    pub fn new(base: &str, token: Option<String>) -> Self {
        NodeClient { base: base.trim_end_matches('/').to_string(), token, http: reqwest::Client::new() }
    }

    fn request(&self, method: reqwest::Method, path: &str) -> reqwest::RequestBuilder {
        let builder = self.http.request(method, format!("{}{path}", self.base));
        match &self.token {
            Some(token) => builder.bearer_auth(token),
            None => builder,
        }
    }

    async fn send<T: DeserializeOwned>(&self, builder: reqwest::RequestBuilder) -> Result<T, ClientError> {
        let response = builder.send().await?;
        let status = response.status();
        if status.is_success() {
            return Ok(response.json().await?);
        }
        let text = response.text().await.unwrap_or_default();
        let message = serde_json::from_str::<ErrorResponse>(&text).map(|e| e.error).unwrap_or(text);
        Err(ClientError::Api { status: status.as_u16(), message })
    }

    pub async fn register(&self, nodes: Vec<String>) -> Result<RegisterResponse, ClientError> {
        self.send(self.request(reqwest::Method::POST, "/nodes/register").json(&NodesRequest { nodes })).await
    }

    pub async fn remove(&self, nodes: Vec<String>) -> Result<RemoveResponse, ClientError> {
        self.send(self.request(reqwest::Method::POST, "/nodes/remove").json(&NodesRequest { nodes })).await
    }

    pub async fn submit(&self, tx: &NewTransactionRequest) -> Result<NewTransactionResponse, ClientError> {
        self.send(self.request(reqwest::Method::POST, "/transactions/new").json(tx)).await
    }

    pub async fn forge(&self) -> Result<NewBlockResponse, ClientError> {
        self.send(self.request(reqwest::Method::POST, "/blocks/new")).await
    }

    pub async fn chain(&self) -> Result<ChainResponse, ClientError> {
        self.send(self.request(reqwest::Method::GET, "/chain")).await
    }

    pub async fn resolve(&self) -> Result<ResolveResponse, ClientError> {
        self.send(self.request(reqwest::Method::GET, "/nodes/resolve")).await
    }

    pub async fn acl(&self) -> Result<AclResponse, ClientError> {
        self.send(self.request(reqwest::Method::GET, "/acl")).await
    }
}
