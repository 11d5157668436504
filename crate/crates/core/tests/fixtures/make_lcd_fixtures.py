#!/usr/bin/env python3
"""Regenerates the bundled LCD-layout fixture files.

The files follow the NOAA Local Climatological Data CSV layout (quoted
fields, station metadata columns, FM-15/FM-16 hourly reports, SOD daily
summary rows) but the observations are synthetic: a diurnal cycle plus a
seeded AR(1) synoptic component, with a handful of deliberate quirks:

* trailing quality-suffix letters ("78s")
* "VRB" wind direction at low speed
* "*" and empty cells for missing values
* FM-16 specials sharing an hour with the routine FM-15 report
* a first report with a missing field
* SOD rows with empty hourly columns

Usage: python3 make_lcd_fixtures.py  (writes next to this script)
"""

import csv
import math
import os
import random
from datetime import datetime, timedelta

HEADER = [
    "STATION", "DATE", "LATITUDE", "LONGITUDE", "ELEVATION", "NAME", "REPORT_TYPE", "SOURCE",
    "HourlyAltimeterSetting", "HourlyDewPointTemperature", "HourlyDryBulbTemperature",
    "HourlyPrecipitation", "HourlyPresentWeatherType", "HourlyPressureChange",
    "HourlyPressureTendency", "HourlyRelativeHumidity", "HourlySkyConditions",
    "HourlySeaLevelPressure", "HourlyStationPressure", "HourlyVisibility",
    "HourlyWetBulbTemperature", "HourlyWindDirection", "HourlyWindGustSpeed", "HourlyWindSpeed",
    "Sunrise", "Sunset", "DailyAverageDryBulbTemperature", "DailyAverageWindSpeed",
    "DailyMaximumDryBulbTemperature", "DailyMinimumDryBulbTemperature", "REM",
]

SITES = {
    "starkville": dict(
        station="99999953001", name="STARKVILLE SYNTHETIC FIELD, MS US", lat="33.4333",
        lon="-88.8500", elev="100.6", minute=56, mean_wind=6.5, seed=20220701,
    ),
    "meridian": dict(
        station="99999953002", name="MERIDIAN SYNTHETIC FIELD, MS US", lat="32.3333",
        lon="-88.7500", elev="94.2", minute=53, mean_wind=5.0, seed=20220702,
    ),
}

HOURS = 300
START = datetime(2022, 7, 1, 0, 0)


def rel_humidity(t_f, td_f):
    t = (t_f - 32) / 1.8
    td = (td_f - 32) / 1.8
    es = math.exp(17.625 * t / (243.04 + t))
    e = math.exp(17.625 * td / (243.04 + td))
    return 100.0 * e / es


def wet_bulb(t_f, rh):
    # Stull (2011) approximation, Celsius in / out.
    t = (t_f - 32) / 1.8
    tw = (t * math.atan(0.151977 * math.sqrt(rh + 8.313659)) + math.atan(t + rh)
          - math.atan(rh - 1.676331) + 0.00391838 * rh ** 1.5 * math.atan(0.023101 * rh) - 4.686035)
    return tw * 1.8 + 32


def generate(site, cfg):
    rng = random.Random(cfg["seed"])
    rows = []
    synoptic_t = 0.0
    synoptic_w = 0.0
    pressure = 29.98
    direction = 200.0
    rain = 0
    last_day_temps = []
    last_day_winds = []

    def meta(date, report_type, source):
        return [cfg["station"], date.strftime("%Y-%m-%dT%H:%M:%S"), cfg["lat"], cfg["lon"],
                cfg["elev"], cfg["name"], report_type, source]

    for h in range(HOURS):
        hour_start = START + timedelta(hours=h)
        local_hour = hour_start.hour
        synoptic_t = 0.85 * synoptic_t + rng.gauss(0, 0.9)
        synoptic_w = 0.8 * synoptic_w + rng.gauss(0, 0.9)
        pressure += rng.gauss(0, 0.012) - 0.02 * (pressure - 29.98)
        direction = (direction + rng.gauss(0, 25)) % 360
        if rain == 0 and rng.random() < 0.03:
            rain = rng.randint(2, 5)

        diurnal = math.sin(2 * math.pi * (local_hour - 9) / 24)
        temp = 81 + 8.5 * diurnal + synoptic_t - (4 if rain else 0)
        dew = min(temp - 0.5, 71.5 + 0.35 * synoptic_t + rng.gauss(0, 0.8) + (1.5 if rain else 0))
        rh = rel_humidity(temp, dew)
        wb = wet_bulb(temp, rh)
        wind = max(0.0, cfg["mean_wind"] + 3.0 * diurnal + 1.6 * synoptic_w + (4 if rain else 0))
        gust = wind + 8 + rng.random() * 6 if wind > 11 else None
        slp = pressure
        stp = pressure - 0.37 * float(cfg["elev"]) / 100.6
        vis = 10.0
        if rain:
            vis = rng.choice([1.5, 2.5, 4.0, 5.0, 7.0])
            rain -= 1
        elif local_hour in (5, 6) and rng.random() < 0.25:
            vis = rng.choice([0.75, 3.0, 6.0])

        w_int = int(round(wind))
        if w_int == 0:
            dir_s = "000"
        elif w_int <= 5 and rng.random() < 0.15:
            dir_s = "VRB"
        else:
            dir_s = "%03d" % (int(round(direction / 10.0)) * 10 % 360 or 360)

        vals = {
            "HourlyAltimeterSetting": "%.2f" % (slp + 0.01),
            "HourlyDewPointTemperature": str(int(round(dew))),
            "HourlyDryBulbTemperature": str(int(round(temp))),
            "HourlyPrecipitation": ("%.2f" % (rng.random() * 0.2)) if vis < 10 and rain else "0.00",
            "HourlyPresentWeatherType": "-RA:02 BR:1 |RA |RA" if vis < 6 else "",
            "HourlyPressureChange": "",
            "HourlyPressureTendency": "",
            "HourlyRelativeHumidity": str(int(round(min(rh, 100)))),
            "HourlySkyConditions": "FEW:02 40 BKN:07 250" if rain else "CLR:00",
            "HourlySeaLevelPressure": "%.2f" % slp,
            "HourlyStationPressure": "%.2f" % stp,
            "HourlyVisibility": "%.2f" % vis,
            "HourlyWetBulbTemperature": str(int(round(wb))),
            "HourlyWindDirection": dir_s,
            "HourlyWindGustSpeed": str(int(round(gust))) if gust else "",
            "HourlyWindSpeed": str(w_int),
        }

        # Deliberate quirks.
        if h == 0:
            vals["HourlySeaLevelPressure"] = ""
        if h % 37 == 11:
            vals["HourlyDryBulbTemperature"] += "s"
        if h % 53 == 20:
            vals["HourlyDewPointTemperature"] += "s"
            vals["HourlyWetBulbTemperature"] += "s"
        if h % 61 == 30:
            vals["HourlySeaLevelPressure"] = "*"
        if h % 71 == 45:
            vals["HourlyStationPressure"] = ""
        if h == 7:
            vals["HourlyWindDirection"] = "VRB"
            vals["HourlyWindSpeed"] = "3"

        def emit(minute, report_type, source, v):
            row = meta(hour_start + timedelta(minutes=minute), report_type, source)
            row += [v.get(col, "") for col in HEADER[8:24]]
            row += ["", "", "", "", "", "", "MET10" + ("%03d" % (h % 1000)) + " METAR synthetic, remark"]
            rows.append(row)

        # A special observation earlier in the same hour; the routine one follows.
        if h % 29 == 5 or h == 8:
            special = dict(vals)
            special["HourlyWindSpeed"] = str(max(0, w_int + 2))
            special["HourlyVisibility"] = "%.2f" % max(0.5, vis - 1.0)
            emit(14, "FM-16", "7", special)
        emit(cfg["minute"], "FM-15", "7", vals)

        last_day_temps.append(temp)
        last_day_winds.append(wind)
        if local_hour == 23:
            row = meta(hour_start + timedelta(minutes=59), "SOD  ", "6")
            row += [""] * 16
            row += ["0544", "2006", str(int(round(sum(last_day_temps) / len(last_day_temps)))),
                    "%.1f" % (sum(last_day_winds) / len(last_day_winds)),
                    str(int(round(max(last_day_temps)))), str(int(round(min(last_day_temps)))),
                    "SYN SOD"]
            rows.append(row)
            last_day_temps, last_day_winds = [], []
    return rows


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    for site, cfg in SITES.items():
        path = os.path.join(here, "%s_2022-07.csv" % site)
        with open(path, "w", newline="") as f:
            w = csv.writer(f, quoting=csv.QUOTE_ALL, lineterminator="\n")
            w.writerow(HEADER)
            w.writerows(generate(site, cfg))
        print("wrote", path)


if __name__ == "__main__":
    main()
