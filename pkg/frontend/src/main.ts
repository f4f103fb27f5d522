import { mount } from "./app.js";

// same-host deployment by default; override with ?api=http://host:port
const params = new URLSearchParams(location.search);
const base = params.get("api") || `${location.protocol}//${location.host}`;

mount(document.getElementById("app")!, { base });
