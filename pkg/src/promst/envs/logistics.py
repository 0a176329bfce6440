"""Package delivery with per-city trucks and an inter-city airplane."""

from __future__ import annotations

import hashlib
import re

from .base import Environment, InstanceError, StepOutcome, register_env

ACTION_RE = re.compile(
    r"(?:"
    r"load (?P<l_pkg>\S+) into (?P<l_veh>\S+) at (?P<l_loc>\S+)"
    r"|unload (?P<u_pkg>\S+) from (?P<u_veh>\S+) at (?P<u_loc>\S+)"
    r"|drive (?P<d_trk>\S+) from (?P<d_from>\S+) to (?P<d_to>\S+) in (?P<d_city>\S+)"
    r"|fly (?P<f_pln>\S+) from (?P<f_from>\S+) to (?P<f_to>\S+)"
    r")",
    re.IGNORECASE,
)


def generate_logistics(rng, params):
    n_cities = params.setdefault("n_cities", 2)
    locs_per_city = params.setdefault("locs_per_city", 2)
    n_packages = params.setdefault("n_packages", 3)
    if n_cities < 1 or locs_per_city < 1 or n_packages < 1:
        raise InstanceError("n_cities, locs_per_city, n_packages must be >= 1")
    if n_cities * locs_per_city < 2:
        raise InstanceError("need at least 2 locations to move packages")
    locations = [
        f"city{c}_loc{l}" for c in range(n_cities) for l in range(locs_per_city)
    ]
    packages = {}
    for i in range(n_packages):
        start = rng.choice(locations)
        goal = rng.choice([loc for loc in locations if loc != start])
        packages[f"package{i}"] = {"at": start, "goal": goal}
    trucks = {f"truck{c}": rng.choice(
        [f"city{c}_loc{l}" for l in range(locs_per_city)]
    ) for c in range(n_cities)}
    airplane_at = f"city{rng.randrange(n_cities)}_loc0"
    return {
        "n_cities": n_cities,
        "locs_per_city": locs_per_city,
        "packages": packages,
        "trucks": trucks,
        "airplane": airplane_at,
    }


def _city_of(location: str) -> str:
    return location.split("_")[0]


def _is_airport(location: str) -> bool:
    return location.endswith("_loc0")


class Logistics(Environment):
    kind = "logistics"

    def _reset_state(self):
        state = self.instance.initial_state
        # Package position: a location name, or "in:<vehicle>".
        self.packages = {p: d["at"] for p, d in state["packages"].items()}
        self.goals = {p: d["goal"] for p, d in state["packages"].items()}
        self.trucks = dict(state["trucks"])
        self.airplane = state["airplane"]

    def subgoals_done(self) -> int:
        return sum(1 for p, at in self.packages.items() if at == self.goals[p])

    def subgoals_total(self) -> int:
        return len(self.packages)

    def state_hash(self) -> str:
        key = f"{sorted(self.packages.items())}|{sorted(self.trucks.items())}|{self.airplane}"
        return hashlib.sha1(key.encode()).hexdigest()

    def _vehicle_at(self, vehicle: str):
        if vehicle in self.trucks:
            return self.trucks[vehicle]
        if vehicle == "airplane0":
            return self.airplane
        return None

    def _observe(self) -> str:
        lines = [
            "Locations are named cityC_locL; locL=loc0 is the airport of its city.",
        ]
        for pkg in sorted(self.packages):
            at = self.packages[pkg]
            where = f"in {at[3:]}" if at.startswith("in:") else f"at {at}"
            lines.append(f"{pkg} is {where}; its goal is {self.goals[pkg]}.")
        for truck in sorted(self.trucks):
            lines.append(f"{truck} is at {self.trucks[truck]}.")
        lines.append(f"airplane0 is at {self.airplane}.")
        return "\n".join(lines)

    def _invalid(self, reason: str) -> StepOutcome:
        return StepOutcome(
            observation=self._observe(), env_feedback=reason, error="invalid_action"
        )

    def _apply(self, action_text: str) -> StepOutcome:
        match = ACTION_RE.search(action_text)
        if not match:
            return StepOutcome(
                observation=self._observe(),
                env_feedback=(
                    "Could not find a valid logistics action in the reply. Expected "
                    "one of: load <package> into <vehicle> at <location>, unload "
                    "<package> from <vehicle> at <location>, drive <truck> from "
                    "<location> to <location> in <city>, fly <airplane> from "
                    "<airport> to <airport>."
                ),
                error="syntactic",
            )
        g = {k: (v.strip(".,'\"").lower() if v else None) for k, v in match.groupdict().items()}

        if g["l_pkg"]:
            pkg, veh, loc = g["l_pkg"], g["l_veh"], g["l_loc"]
            if pkg not in self.packages:
                return self._invalid(f"{pkg} is not a package")
            veh_at = self._vehicle_at(veh)
            if veh_at is None:
                return self._invalid(f"{veh} is not a truck or airplane")
            if self.packages[pkg] != loc or veh_at != loc:
                return self._invalid(
                    f"{pkg} and {veh} must both be at {loc} to load"
                )
            if veh == "airplane0" and not _is_airport(loc):
                return self._invalid("airplanes can only be loaded at airports")
            self.packages[pkg] = f"in:{veh}"
            msg = f"Loaded {pkg} into {veh} at {loc}."
        elif g["u_pkg"]:
            pkg, veh, loc = g["u_pkg"], g["u_veh"], g["u_loc"]
            if pkg not in self.packages:
                return self._invalid(f"{pkg} is not a package")
            veh_at = self._vehicle_at(veh)
            if veh_at is None:
                return self._invalid(f"{veh} is not a truck or airplane")
            if self.packages[pkg] != f"in:{veh}":
                return self._invalid(f"{pkg} is not in {veh}")
            if veh_at != loc:
                return self._invalid(f"{veh} is at {veh_at}, not {loc}")
            self.packages[pkg] = loc
            msg = f"Unloaded {pkg} from {veh} at {loc}."
        elif g["d_trk"]:
            trk, frm, to, city = g["d_trk"], g["d_from"], g["d_to"], g["d_city"]
            if trk not in self.trucks:
                return self._invalid(f"{trk} is not a truck")
            if self.trucks[trk] != frm:
                return self._invalid(f"{trk} is at {self.trucks[trk]}, not {frm}")
            if _city_of(frm) != _city_of(to) or _city_of(frm) != city:
                return self._invalid(
                    f"trucks cannot leave their city; {frm} and {to} must both be in {city}"
                )
            self.trucks[trk] = to
            msg = f"Drove {trk} from {frm} to {to}."
        else:
            pln, frm, to = g["f_pln"], g["f_from"], g["f_to"]
            if pln != "airplane0":
                return self._invalid(f"{pln} is not an airplane")
            if self.airplane != frm:
                return self._invalid(f"airplane0 is at {self.airplane}, not {frm}")
            if not (_is_airport(frm) and _is_airport(to)):
                return self._invalid("airplanes fly only between airports (loc0 locations)")
            self.airplane = to
            msg = f"Flew airplane0 from {frm} to {to}."
        return StepOutcome(observation="", env_feedback=msg)


register_env("logistics", Logistics, generate_logistics)
