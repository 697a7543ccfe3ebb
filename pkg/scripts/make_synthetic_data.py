"""Regenerate the bundled synthetic weather and demand CSVs."""
from pathlib import Path

from solarev.core import region_preset
from solarev.ingest import Site, write_demand_csv, write_weather_csv
from solarev.synthetic import CLIMATES, DEMAND_FILES, WEATHER_FILES, synthetic_demand, synthetic_weather

OUT = Path(__file__).resolve().parents[1] / "src" / "solarev" / "data"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    paris = region_preset("Paris")
    kyoto = region_preset("Kyoto")
    idf = region_preset("IleDeFrance")
    w_paris = synthetic_weather(Site(paris.latitude, paris.longitude, paris.utc_offset), CLIMATES["Paris"], seed=2019)
    w_kyoto = synthetic_weather(Site(kyoto.latitude, kyoto.longitude, kyoto.utc_offset), CLIMATES["Kyoto"], seed=2018)
    write_weather_csv(w_paris, OUT / WEATHER_FILES["Paris"])
    write_weather_csv(w_kyoto, OUT / WEATHER_FILES["Kyoto"])
    write_demand_csv(synthetic_demand(w_paris, idf.annual_demand, "paris", seed=7), OUT / DEMAND_FILES["IleDeFrance"])
    write_demand_csv(synthetic_demand(w_kyoto, kyoto.annual_demand, "kyoto", seed=8), OUT / DEMAND_FILES["Kyoto"])


if __name__ == "__main__":
    main()
