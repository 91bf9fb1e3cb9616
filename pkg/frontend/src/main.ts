import { mountApp } from "./app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const params = new URLSearchParams(window.location.search);
const base = params.get("service") ?? "http://127.0.0.1:8080";
mountApp(root, base);
