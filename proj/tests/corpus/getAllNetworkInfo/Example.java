public class NetworkCheck {
    boolean online(ConnectivityManager cm) {
        boolean connected = false;
        if (Build.VERSION.SDK_INT >= Build.VERSION_CODES.LOLLIPOP) {
            Network[] networks = cm.getAllNetworks();
            for (Network network : networks) {
                NetworkInfo info = cm.getNetworkInfo(network);
                if (info != null) {
                    connected = true;
                }
            }
        } else {
            NetworkInfo[] infos = cm.getAllNetworkInfo();
            connected = infos != null;
        }
        return connected;
    }
}
