"""Command-line client for the pole-expansion service.

Every subcommand goes through the HTTP API: against a remote server when
``--url`` is given, otherwise against the app mounted in-process, so
headless runs need no separate server.  Results land as CSV/JSON files
under the output directory and the exit code is 0 only if every
assertion in the run passed.
"""

from __future__ import annotations

import json
import os
import sys

import click
import httpx

from .experiments import TableRow, write_report

DEFAULT_OUT = "fermipole-out"


def _client(url: str | None) -> httpx.Client:
    if url:
        return httpx.Client(base_url=url, timeout=3600.0)
    from .service.app import app

    return httpx.Client(
        transport=httpx.ASGITransport(app=app), base_url="http://fermipole.local", timeout=None
    )


def _load_config_file(path: str | None) -> dict:
    """KEY=VALUE lines; values override command-line flags."""
    if not path:
        return {}
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            out[key.strip().lower()] = value.strip()
    return out


def _merge(ctx_params: dict, overrides: dict) -> dict:
    params = dict(ctx_params)
    casts = {"size": int, "seed": int, "parallel": int, "tol": float, "full": lambda v: v.lower() in ("1", "true", "yes")}
    for key, value in overrides.items():
        if key in ("size", "seed", "tol", "parallel", "out", "url", "full"):
            params[key] = casts.get(key, str)(value)
    return params


def _out_dir(params: dict) -> str:
    return os.environ.get("FERMIPOLE_OUT", params.get("out") or DEFAULT_OUT)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code != 200:
        raise click.ClickException(f"{path} failed with {resp.status_code}: {resp.text}")
    return resp.json()


def _experiment_payload(params: dict) -> dict:
    return {
        "size": params["size"],
        "seed": params["seed"],
        "tol": params["tol"],
        "full": params.get("full", False),
        "workers": params.get("parallel", 1),
    }


def _rows_from_doc(rows_doc: list[dict]) -> list[TableRow]:
    return [TableRow(**row) for row in rows_doc]


def _finish_table(name: str, doc: dict, params: dict) -> bool:
    out = _out_dir(params)
    extra = {k: doc[k] for k in ("fit", "system") if doc.get(k) is not None}
    block = write_report(out, name, _rows_from_doc(doc["rows"]), extra=extra)
    ok = doc["all_rows_passed"]
    for row in doc["rows"]:
        status = "ok" if row["passed"] else "FAILED"
        click.echo(
            f"{name} beta*dE={row['beta_delta_e']:>12.0f}  n_pole={row['n_pole']:>4d}  "
            f"drho={row['delta_rho_rel']:.3e}  [{status}]"
        )
    click.echo(f"{name}: wrote {out}/{name}.csv; reference deltas in {out}/report.json")
    return ok and block["all_rows_passed"]


_shared_options = [
    click.option("--size", default=16, show_default=True, help="lattice side length"),
    click.option("--seed", default=0, show_default=True),
    click.option("--tol", default=1e-6, show_default=True, help="density error tolerance"),
    click.option("--out", default=None, help=f"output directory (default {DEFAULT_OUT})"),
    click.option("--parallel", default=1, show_default=True, help="worker threads"),
    click.option("--url", default=None, help="remote service URL; default runs in-process"),
    click.option("--config", "config_path", default=None, help="KEY=VALUE file overriding flags"),
]


def shared_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Pole expansions of the Fermi-Dirac operator: benchmark client."""


def _table_command(name: str):
    @main.command(name=name)
    @shared_options
    @click.option("--full", is_flag=True, help="include the largest beta sweeps")
    def _cmd(config_path, url, **params):
        params = _merge(params, _load_config_file(config_path))
        with _client(params.get("url", url) or url) as client:
            doc = _post(client, f"/experiments/{name}", _experiment_payload(params))
        if not _finish_table(name, doc, params):
            sys.exit(1)

    _cmd.__doc__ = f"Run the {name} benchmark sweep."
    return _cmd


table1 = _table_command("table1")
table2 = _table_command("table2")
table3 = _table_command("table3")


@main.command()
@shared_options
def sign(config_path, url, **params):
    """Zero-temperature convergence curve at a 1e-6 gap."""
    params = _merge(params, _load_config_file(config_path))
    with _client(params.get("url", url) or url) as client:
        doc = _post(client, "/experiments/sign", _experiment_payload(params))
    out = _out_dir(params)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "sign_convergence.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
    for n_pole, err in doc["curve"]:
        click.echo(f"sign n_pole={n_pole:>3d}  drho={err:.3e}")
    fit = doc["fit"]
    click.echo(f"sign: slope={fit['slope']:.4f} R2={fit['r_squared']:.4f} -> {out}/sign_convergence.json")
    reached = min(err for n, err in doc["curve"] if n >= 50)
    if not (fit["r_squared"] >= 0.97 and reached <= params["tol"]):
        sys.exit(1)


@main.command()
@click.argument(
    "name", type=click.Choice(["gapped-loops", "sign-loop", "dumbbell", "matsubara-groups"])
)
@click.option("--set", "overrides", multiple=True, help="override figure parameter, e.g. --set q=40")
@shared_options
def figure(name, overrides, config_path, url, **params):
    """Emit plot-ready pole-configuration JSON for one of the standard figures."""
    params = _merge(params, _load_config_file(config_path))
    kv = {}
    for item in overrides:
        key, _, value = item.partition("=")
        kv[key.strip()] = float(value)
    with _client(params.get("url", url) or url) as client:
        doc = _post(client, "/figures/poles", {"figure": name, "overrides": kv})
    out = _out_dir(params)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"figure_{name}.json")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
    click.echo(f"figure {name}: {len(doc['poles'])} poles -> {path}")


@main.command(name="identity-check")
@shared_options
def identity_check(config_path, url, **params):
    """Verify the Matsubara partial sum + digamma tail resummation identity."""
    params = _merge(params, _load_config_file(config_path))
    with _client(params.get("url", url) or url) as client:
        doc = _post(client, "/checks/identity", {})
    status = "ok" if doc["passed"] else "FAILED"
    click.echo(f"identity-check max residual {doc['max_residual']:.3e} [{status}]")
    if not doc["passed"]:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    uvicorn.run("fermipole.service.app:app", host=host, port=port)


if __name__ == "__main__":
    main()
