"""proxweb: proximity services for smart-city venues.

A registry of wireless nodes (BLE beacons, Wi-Fi APs, movable tags), a
key-value rule engine mapping node visibility to content activation,
presence analytics over scan logs, and a deterministic wireless-world
simulator feeding them all.
"""

__version__ = "0.1.0"
