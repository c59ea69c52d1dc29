"""Round-trippable schedule archives.

A schedule archive is a single versioned JSON document holding the grid
design, every grid-point certificate, the per-point level table, and a
fingerprint of the network it was synthesized for. JSON numbers use
Python's shortest round-trip float formatting, so save/load is exact.
"""

import hashlib
import json

import numpy as np

from .errors import IncompatibleArchiveError
from .lmi import FeasibleCertificate
from .scheduling import GainSchedule, GridDesign

FORMAT_NAME = "lpvsync-schedule"
FORMAT_VERSION = 1


def _listify(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def network_fingerprint(net):
    """Content hash of everything synthesis depends on.

    The nonlinearity itself is deliberately absent: certificates only see
    it through the Lipschitz bound R, so any phi respecting the same R
    (e.g. every member of a scheduled family) shares the fingerprint and
    may reuse the schedule.
    """
    dep = net.plant.A
    doc = {
        "n": net.n,
        "edges": sorted(map(list, net.graph.edges)),
        "A": ({"kind": "affine", "A0": dep.A0.tolist(),
               "Delta": dep.Delta.tolist()}
              if dep.kind == "affine" else
              {"kind": "tabulated", "samples": dep.table_rho.tolist(),
               "values": dep.table_mats.tolist()}),
        "B1": net.plant.B1.tolist(),
        "B20": net.plant.B20.tolist(),
        "R": net.plant.R.tolist(),
        "interval": list(net.gamma_interval),
        "agents": [{
            "B2": ag.B2.tolist(), "C2": ag.C2.tolist(), "D2": ag.D2.tolist(),
            "links": {str(j): [H.tolist(), G.tolist()]
                      for j, (H, G) in sorted(ag.links.items())},
        } for ag in net.agents],
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def schedule_to_dict(schedule):
    d = schedule.design
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "network_hash": network_fingerprint(schedule.net),
        "gamma_sq": float(schedule.gamma_sq),
        "gamma_sq_table": [float(v) for v in schedule.gamma_sq_table],
        "recertified": list(schedule.recertified),
        "design": {
            "points": d.points.tolist(),
            "alphas": d.alphas.tolist(),
            "lowers": d.lowers.tolist(),
            "uppers": d.uppers.tolist(),
            "delta": _listify(d.delta),
            "Q": _listify(np.asarray(d.Q)),
            "interval": list(map(float, d.interval)),
        },
        "certificates": [{
            "rho": float(c.rho),
            "gamma_sq": float(c.gamma_sq),
            "margin": float(c.margin),
            "iterations": int(c.iterations),
            "X": [Xi.tolist() for Xi in c.X],
            "tau": c.tau.tolist(),
            "theta": c.theta.tolist(),
        } for c in schedule.certs],
    }


def save_schedule(schedule, path):
    doc = schedule_to_dict(schedule)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    return doc["network_hash"]


def load_schedule(path, net):
    """Rebuild a GainSchedule against the given network.

    The archive's network fingerprint must match; simulating a schedule
    against a different network is refused.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise IncompatibleArchiveError(f"{path} is not a schedule archive")
    if doc.get("version") != FORMAT_VERSION:
        raise IncompatibleArchiveError(
            f"archive version {doc.get('version')} unsupported "
            f"(expected {FORMAT_VERSION})")
    want = network_fingerprint(net)
    if doc["network_hash"] != want:
        raise IncompatibleArchiveError(
            "archive was synthesized for a different network "
            f"(hash {doc['network_hash'][:12]}.. != {want[:12]}..)")
    dd = doc["design"]
    design = GridDesign(points=np.asarray(dd["points"], float),
                        alphas=np.asarray(dd["alphas"], float),
                        lowers=np.asarray(dd["lowers"], float),
                        uppers=np.asarray(dd["uppers"], float),
                        delta=dd["delta"],
                        Q=np.asarray(dd["Q"], float),
                        interval=tuple(dd["interval"]))
    certs = tuple(
        FeasibleCertificate(
            X=tuple(np.asarray(Xi, float) for Xi in c["X"]),
            tau=np.asarray(c["tau"], float),
            theta=np.asarray(c["theta"], float),
            rho=c["rho"], gamma_sq=c["gamma_sq"], margin=c["margin"],
            iterations=c["iterations"])
        for c in doc["certificates"])
    return GainSchedule(design=design, net=net, certs=certs,
                        gamma_sq=doc["gamma_sq"],
                        gamma_sq_table=np.asarray(doc["gamma_sq_table"]),
                        recertified=tuple(doc.get("recertified", ())))
