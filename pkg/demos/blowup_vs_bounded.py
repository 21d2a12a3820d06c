"""The energy sign decides the fate of a run.

Two initial fields with the same shape family but different domains: on
a = 2*pi the half-mode perturbation has negative energy and the maximum
races to the blowup threshold; on a = pi the single-mode field has zero
energy and the run settles onto a steady state.  The dichotomy driver
checks the outcome against the sign of E[u0] and reports both runs.
"""

import json

from nflow.experiments import dichotomy_specs, run_dichotomy


def main() -> None:
    for spec in dichotomy_specs(n=65):
        report = run_dichotomy(spec)
        print(f"== {report['name']} (a = {report['a']:.6g}, p = {report['p']})")
        print(f"   E[u0]   = {report['E0']:.6g}")
        print(f"   outcome = {report['outcome']}"
              + (f" via {report['trigger']}" if report["trigger"] else "")
              + f" at t = {report['t_end']:.6g}")
        print(f"   max u: {report['max_u_initial']:.4g} initially, "
              f"{report['max_u_peak']:.4g} at peak")
        for item in report["assertions"]:
            flag = "ok " if item["passed"] else "BAD"
            print(f"   [{flag}] {item['name']}: {item['detail']}")
        tail = report["trace"][-3:]
        print("   last records:")
        for rec in tail:
            print(f"     t = {rec['t']:.6g}  max_u = {rec['max_u']:.6g}  "
                  f"E = {rec['energy']:.6g}")
        print()
    print(json.dumps({"note": "E < 0 forces blowup; E >= 0 with p <= 2 stays bounded"}))


if __name__ == "__main__":
    main()
