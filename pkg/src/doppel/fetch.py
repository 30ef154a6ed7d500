"""GraphQL client that pulls a repository's discussions into Discussion records.

Speaks the forum host's GraphQL endpoint over HTTPS with bearer-token auth
and walks cursor pagination until exhaustion. Any failure raises before
anything is returned: partial pages are never silently delivered.
"""

from __future__ import annotations

import logging
import requests

from .corpus import Discussion, parse_timestamp
from .errors import (
    AuthError,
    ConnectionFailedError,
    ProviderError,
    ProviderStatusError,
    RateLimitError,
    RequestTimeoutError,
    ValidationError,
)

logger = logging.getLogger(__name__)

DEFAULT_API_URL = "https://api.github.com/graphql"
DEFAULT_PAGE_SIZE = 50

DISCUSSIONS_QUERY = """
query($owner: String!, $name: String!, $first: Int!, $after: String) {
  repository(owner: $owner, name: $name) {
    discussions(first: $first, after: $after, orderBy: {field: CREATED_AT, direction: ASC}) {
      pageInfo { hasNextPage endCursor }
      nodes {
        number
        title
        body
        url
        createdAt
        author { login }
        category { name }
      }
    }
  }
}
"""


def _split_repo(repo: str) -> tuple[str, str]:
    parts = repo.split("/")
    if len(parts) != 2 or not all(parts):
        raise ValidationError(f"repo must be 'owner/name', got {repo!r}")
    return parts[0], parts[1]


def _node_to_discussion(node: dict, project: str) -> Discussion:
    author = node.get("author") or {}
    category = node.get("category") or {}
    return Discussion(
        id=node["number"],
        project=project,
        category=category.get("name") or "",
        author=author.get("login") or "ghost",
        created_at=parse_timestamp(node["createdAt"]),
        title=node.get("title") or "",
        body=node.get("body") or "",
        url=node.get("url"),
    )


def _check_response(resp: requests.Response) -> dict:
    if resp.status_code in (401,):
        raise AuthError(f"authentication failed (HTTP {resp.status_code})")
    if resp.status_code == 403 or resp.status_code == 429:
        retry_after = resp.headers.get("Retry-After")
        if retry_after is not None or resp.headers.get("X-RateLimit-Remaining") == "0":
            raise RateLimitError(
                f"rate limited (HTTP {resp.status_code})",
                retry_after=float(retry_after) if retry_after is not None else None,
            )
        raise AuthError(f"access forbidden (HTTP {resp.status_code})")
    if resp.status_code != 200:
        raise ProviderStatusError(
            f"discussions query failed (HTTP {resp.status_code})", status=resp.status_code
        )
    payload = resp.json()
    errors = payload.get("errors")
    if errors:
        kinds = {e.get("type") for e in errors if isinstance(e, dict)}
        message = "; ".join(str(e.get("message", e)) for e in errors)
        if "RATE_LIMITED" in kinds:
            raise RateLimitError(f"rate limited: {message}")
        raise ProviderError(f"query errors: {message}")
    return payload


def fetch_discussions(
    repo: str,
    auth: str,
    page_size: int = DEFAULT_PAGE_SIZE,
    api_url: str = DEFAULT_API_URL,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> list[Discussion]:
    """Fetch every public discussion of ``repo`` (``owner/name``).

    Requests run sequentially, one page at a time, so pagination is
    deterministic; the ``project`` field of each record is the full repo slug.

    Args:
        repo: repository slug, e.g. ``vercel/next.js``.
        auth: bearer token with discussions read scope.
        page_size: items per page (the host caps this at 100).
        api_url: GraphQL endpoint; overridable for testing against a mock.
        timeout: per-request timeout in seconds.
        session: optional pre-configured ``requests.Session``.

    Raises:
        AuthError: the token was rejected.
        RateLimitError: the host throttled us; ``retry_after`` is surfaced.
        RequestTimeoutError / ConnectionFailedError: network failures.
        ProviderError: any other host-side failure.
    """
    owner, name = _split_repo(repo)
    if page_size < 1:
        raise ValidationError(f"page_size must be >= 1, got {page_size}")
    http = session or requests.Session()
    headers = {"Authorization": f"Bearer {auth}", "Accept": "application/json"}

    discussions: list[Discussion] = []
    cursor: str | None = None
    page = 0
    while True:
        variables = {"owner": owner, "name": name, "first": page_size, "after": cursor}
        try:
            resp = http.post(
                api_url,
                json={"query": DISCUSSIONS_QUERY, "variables": variables},
                headers=headers,
                timeout=timeout,
            )
        except requests.Timeout as exc:
            raise RequestTimeoutError(f"timed out fetching {repo} page {page + 1}") from exc
        except requests.ConnectionError as exc:
            raise ConnectionFailedError(f"cannot reach {api_url}: {exc}") from exc

        payload = _check_response(resp)
        repository = (payload.get("data") or {}).get("repository")
        if repository is None:
            raise ProviderError(f"repository {repo!r} not found or not accessible")
        block = repository["discussions"]
        for node in block["nodes"]:
            discussions.append(_node_to_discussion(node, project=repo))
        page += 1
        info = block["pageInfo"]
        if not info["hasNextPage"]:
            break
        cursor = info["endCursor"]

    logger.info("fetched %d discussions from %s in %d page(s)", len(discussions), repo, page)
    return discussions
